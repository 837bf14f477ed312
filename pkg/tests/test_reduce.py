import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moa import core, fft
from moa import reduce as rd
from moa.errors import DomainError, MoaIndexError, NotReducible
from moa.gen import random_expr


def _leaf_data(e):
    leaf = rd.leaf_of(e)
    return core.reshape(leaf.shape, core.iota(core.prod(leaf.shape)))


@given(st.integers(0, 2 ** 32))
@settings(max_examples=150)
def test_onf_matches_materialize(seed):
    e = random_expr(random.Random(seed))
    data = _leaf_data(e)
    want = rd.materialize(e, data)
    assert rd.infer_shape(e) == want.shape
    try:
        nest = rd.reduce_to_onf(e)
    except NotReducible:
        return
    assert np.array_equal(nest.evaluate(data.data), want.data)


@given(st.integers(0, 2 ** 32))
@settings(max_examples=150)
def test_dnf_matches_materialize(seed):
    e = random_expr(random.Random(seed))
    data = _leaf_data(e)
    want = rd.materialize(e, data)
    dnf = rd.reduce_to_dnf(e)
    assert dnf.shape == want.shape
    assert [dnf.offset(i) for i in core.enumerate_indices(want.shape)] == want.data.tolist()


@given(st.integers(0, 2 ** 32))
@settings(max_examples=100)
def test_sexpr_roundtrip(seed):
    e = random_expr(random.Random(seed))
    assert rd.parse_sexpr(rd.format_sexpr(e)) == e


@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
def test_inverse_transposes_give_identity_map(shape, data):
    perm = data.draw(st.permutations(range(len(shape))))
    inv = tuple(perm.index(k) for k in range(len(shape)))
    e = rd.Transpose(inv, rd.Transpose(tuple(perm), rd.Leaf(tuple(shape))))
    dnf = rd.reduce_to_dnf(e)
    for i in core.enumerate_indices(shape):
        assert dnf.index_map(i) == i
    nest = rd.reduce_to_onf(e)
    assert nest.addresses().tolist() == list(range(core.prod(shape)))


def test_leaf_only_is_one_loop():
    nest = rd.reduce_to_onf(rd.parse_sexpr("(leaf A (3 4))"))
    assert len(nest.loops) == 1
    assert rd.render_onf(nest) == "for i in 0..12 step 1 {\n  @A + i\n}"


def test_reshape_transpose_render():
    e = rd.parse_sexpr("(reshape (2 4) (transpose (reshape (2 4) (leaf A (8)))))")
    assert rd.materialize(e, core.iota(8)) == rd.materialize(rd.reshape_transpose_expr(2, 4), core.iota(8))
    nest = rd.reduce_to_onf(e)
    assert "@A + j + 4*i" in rd.render_onf(nest)
    assert nest.addresses().tolist() == fft.reshape_transpose(np.arange(8), 4).tolist()


@pytest.mark.parametrize("r,c", [(8, 4), (4, 8), (2, 16), (16, 2)])
def test_reshape_transpose_matches_fft_permutation(r, c):
    nest = rd.reduce_to_onf(rd.reshape_transpose_expr(r, c))
    assert nest.addresses().tolist() == fft.reshape_transpose(np.arange(r * c), c).tolist()
    assert len(nest.loops) <= 2 + 1


@pytest.mark.parametrize("d,sigma", [(5, 2), (6, 4), (4, 0), (4, 4), (10, 6)])
def test_final_transpose_onf(d, sigma):
    nest = rd.final_transpose_onf(d, sigma)
    want = fft.final_transpose(np.arange(2 ** d), 1, 2 ** sigma) if sigma else np.arange(2 ** d)
    assert np.array_equal(nest.addresses(), want)
    text = rd.render_onf(nest)
    assert "for t in 0..2^(d-sigma)" in text and "for s in 0..2^sigma" in text
    assert "@x + s*2^(d-sigma) + t" in text


def test_rotate_wrap_not_reducible():
    # 2 3 4 5 0 1 has no single affine address over a loop nest
    e = rd.parse_sexpr("(rotate 1 (reshape (3 2) (leaf A (6))))")
    with pytest.raises(NotReducible):
        rd.reduce_to_onf(e)
    assert rd.reduce_to_dnf(e).offset((2, 0)) == 0
    full = rd.parse_sexpr("(rotate 3 (reshape (3 2) (leaf A (6))))")
    assert rd.reduce_to_onf(full).addresses().tolist() == list(range(6))


def test_take_after_cyclic_reshape():
    e = rd.parse_sexpr("(take -1 (reshape (5 3) (leaf A (5))))")
    nest = rd.reduce_to_onf(e)
    assert nest.evaluate(np.arange(5)).tolist() == [2, 3, 4]


def test_empty_result():
    e = rd.parse_sexpr("(take 0 (leaf A (4)))")
    assert rd.reduce_to_onf(e).addresses().size == 0


def test_negative_stride_render():
    nest = rd.reduce_to_onf(rd.parse_sexpr("(reverse (leaf A (4)))"))
    assert nest.addresses().tolist() == [3, 2, 1, 0]
    assert rd.render_onf(nest).splitlines()[1].strip() == "@A + 3 - i"


@pytest.mark.parametrize("text", [
    "(leaf A (3)", "(frobnicate (leaf A (3)))", "(take 5 (leaf A (3)))",
    "(transpose (0 0) (leaf A (2 2)))", "(psi (3) (leaf A (3 2)))", "(reshape 4 (leaf A (2)))",
])
def test_parse_errors(text):
    with pytest.raises((DomainError, MoaIndexError, IndexError)):
        rd.parse_sexpr(text)


# PCT


def test_pct_example():
    assert rd.pct_lower((2,), (4, 6, 7)) == (84, 42)
    assert rd.pct_lower((), (4, 6, 7)) == (0, 168)
    with pytest.raises(MoaIndexError):
        rd.pct_lower((1, 1, 1, 1), (4, 6, 7))


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.data())
def test_pct_block(shape, data):
    k = data.draw(st.integers(0, len(shape)))
    j = tuple(data.draw(st.integers(0, s - 1)) for s in shape[:k])
    start, length = rd.pct_lower(j, shape)
    offs = sorted(core.gamma(j + rest, shape) for rest in core.enumerate_indices(shape[k:]))
    assert offs == list(range(start, start + length))


def test_loop_bound_on_worked_examples():
    cases = [rd.reshape_transpose_expr(8, 4), rd.final_transpose_expr(5, 2),
             rd.parse_sexpr("(psi (1) (leaf A (3 5 4)))")]
    for e in cases:
        assert len(rd.reduce_to_onf(e).loops) <= len(rd.infer_shape(e)) + 1


def test_loop_bound_can_be_exceeded():
    # a bit-permuting transpose flattened to one axis needs one loop per bit
    e = rd.Reshape((16,), rd.Transpose((3, 2, 1, 0), rd.Reshape((2, 2, 2, 2), rd.Leaf((16,)))))
    assert len(rd.reduce_to_onf(e).loops) == 4 > len(rd.infer_shape(e)) + 1


def test_psi_select_on_cube_matches_core():
    a = core.reshape((3, 5, 4), core.iota(60))
    for j in itertools.product(range(3), range(5)):
        e = rd.PsiSelect(j, rd.Leaf((3, 5, 4)))
        assert rd.reduce_to_onf(e).evaluate(a.data).tolist() == core.psi(j, a).data.tolist()
