"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def unit_quaternions(draw):
    v = np.array(draw(st.lists(finite, min_size=4, max_size=4)))
    if np.linalg.norm(v) < 1e-3:
        v = np.array([1.0, 0.0, 0.0, 0.0])
    return v / np.linalg.norm(v)


@st.composite
def tangents(draw, max_angle=np.pi - 0.01):
    v = np.array(draw(st.lists(finite, min_size=3, max_size=3)))
    n = np.linalg.norm(v)
    if n < 1e-6:
        return np.zeros(3)
    angle = draw(st.floats(min_value=0.0, max_value=max_angle))
    return v / n * angle


@st.composite
def unit_vectors(draw):
    v = np.array(draw(st.lists(finite, min_size=3, max_size=3)))
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.0, 1.0])
    return v / np.linalg.norm(v)


seeds = st.integers(min_value=0, max_value=2**31 - 1)
