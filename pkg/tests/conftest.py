import numpy as np
import pytest
from hypothesis import assume
from hypothesis import strategies as st

import tiltlab as tl
from tiltlab.errors import TiltlabError


@pytest.fixture(scope="session")
def s2():
    return tl.load_source(tl.builtin_spec_path("s2"))


@pytest.fixture(scope="session")
def s3():
    return tl.load_source(tl.builtin_spec_path("s3"))


@pytest.fixture(scope="session")
def s3_markov():
    return tl.load_source(tl.builtin_spec_path("s3_markov"))


@pytest.fixture(scope="session")
def s3_hmm():
    return tl.load_source(tl.builtin_spec_path("s3_hmm"))


@st.composite
def categorical_sources(draw, min_size=2, max_size=6):
    """Random sources satisfying the standing assumptions."""
    k = draw(st.integers(min_size, max_size))
    raw = draw(
        st.lists(
            st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
            min_size=k,
            max_size=k,
        )
    )
    theta = np.asarray(raw, dtype=np.float64)
    theta = theta / theta.sum()
    source = tl.CategoricalSource(tl.letters(k), theta)
    try:
        tl.validate(source)
    except TiltlabError:
        assume(False)
    return source
