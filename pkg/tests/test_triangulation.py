import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import cuspflow as cf
from cuspflow.triangulation import Tet, CuspedTriangulation


def make_doc(num_edges, num_cusps, tets):
    return json.dumps({"num_edges": num_edges, "num_cusps": num_cusps, "tets": tets})


SINGLE_TET_DISTINCT = make_doc(6, 4, [
    {"edges": [0, 1, 2, 3, 4, 5], "cusps": [0, 1, 2, 3]},
])


def test_parse_figure8(fig8):
    assert fig8.num_tets == 2
    assert fig8.num_edges == 2
    assert fig8.num_cusps == 1
    assert_array_equal(cf.edge_degrees(fig8), [6, 6])
    assert_array_equal(cf.build_cusp_matrix(fig8), [[2, 2]])


def test_parse_single_tet_distinct_edges_fails_validation():
    T = cf.parse_triangulation(SINGLE_TET_DISTINCT)
    assert T.num_tets == 1 and T.num_edges == 6
    with pytest.raises(cf.TriangulationError, match="edge count"):
        cf.validate(T)


def test_parse_empty_tets_is_error():
    with pytest.raises(cf.TriangulationError, match="nonempty"):
        cf.parse_triangulation(make_doc(1, 1, []))


def test_parse_malformed_document():
    with pytest.raises(cf.TriangulationError, match="malformed"):
        cf.parse_triangulation("{not json")


def test_parse_index_out_of_range():
    doc = make_doc(1, 1, [{"edges": [0, 0, 0, 0, 0, 7], "cusps": [0, 0, 0, 0]}])
    with pytest.raises(cf.TriangulationError, match="out of range"):
        cf.parse_triangulation(doc)


def test_parse_duplicate_tet_ids():
    doc = make_doc(2, 1, [
        {"id": 3, "edges": [0, 0, 1, 0, 1, 1], "cusps": [0, 0, 0, 0]},
        {"id": 3, "edges": [0, 1, 0, 1, 1, 0], "cusps": [0, 0, 0, 0]},
    ])
    with pytest.raises(cf.TriangulationError, match="duplicate"):
        cf.parse_triangulation(doc)


def test_incidence_figure8(fig8):
    G = cf.build_incidence(fig8)
    assert G.shape == (2, 12)
    assert_array_equal(G.sum(axis=1), [6, 6])
    assert_array_equal(G.sum(axis=0), np.ones(12, dtype=int))
    assert G.sum() == 6 * fig8.num_tets


def test_incidence_identity_and_repeated():
    T = cf.parse_triangulation(SINGLE_TET_DISTINCT)
    assert_array_equal(cf.build_incidence(T), np.eye(6, dtype=int))

    T1 = CuspedTriangulation(num_edges=1, num_cusps=1,
                             tets=(Tet(edges=(0,) * 6, cusps=(0,) * 4),))
    assert_array_equal(cf.build_incidence(T1), np.ones((1, 6), dtype=int))


def test_cusp_matrix_end_counting():
    # one tet with a loop edge at cusp 0, a cross edge, and a loop at cusp 1:
    # slots 12->(0,0), 13/14/24/23->(0,1), 34->(1,1)
    T = CuspedTriangulation(num_edges=3, num_cusps=2,
                            tets=(Tet(edges=(0, 1, 1, 2, 1, 1), cusps=(0, 0, 1, 1)),))
    C = cf.build_cusp_matrix(T)
    assert_array_equal(C, [[2, 1, 0], [0, 1, 2]])
    assert_array_equal(C.sum(axis=0), [2, 2, 2])


def test_cusp_matrix_inconsistent_gluing_rejected():
    # edge 0 appears once with ends (0,0) and once with ends (0,1)
    T = CuspedTriangulation(num_edges=2, num_cusps=2,
                            tets=(Tet(edges=(0, 0, 1, 1, 1, 1), cusps=(0, 0, 1, 1)),))
    with pytest.raises(cf.TriangulationError, match="end cusps"):
        cf.build_cusp_matrix(T)
    with pytest.raises(cf.TriangulationError):
        cf.validate(T)


def test_cusp_matrix_rank_of_bundled_example(fig8, fig8_C):
    assert np.linalg.matrix_rank(fig8_C) == fig8.num_cusps


def test_gauge_project_figure8(fig8_C):
    # least-squares oracle: minimize |l - C^T x| over x, here 8x = 8
    l = np.array([1.0, 3.0])
    x, *_ = np.linalg.lstsq(fig8_C.T.astype(float), l, rcond=None)
    expected = l - fig8_C.T @ x
    projected = cf.gauge_project(l, fig8_C)
    assert_allclose(projected, expected, atol=1e-12)
    assert_allclose(projected, [-1.0, 1.0], atol=1e-12)
    assert_allclose(fig8_C @ projected, 0.0, atol=1e-12)


def test_gauge_project_fixes_kernel_and_kills_image(fig8_C):
    l = np.array([0.5, -0.5])  # C l = 0 already
    assert_allclose(cf.gauge_project(l, fig8_C), l, atol=1e-14)
    pure_decoration = fig8_C.T @ np.array([0.7])
    assert_allclose(cf.gauge_project(pure_decoration, fig8_C), 0.0, atol=1e-12)


def test_gauge_project_properties_random():
    rng = np.random.default_rng(11)
    C = np.array([[2, 0, 1, 1], [0, 2, 1, 1]], dtype=float)
    for _ in range(20):
        l = rng.uniform(-5, 5, 4)
        p1 = cf.gauge_project(l, C)
        p2 = cf.gauge_project(p1, C)
        assert_allclose(p1, p2, atol=1e-12)
        assert np.max(np.abs(C @ p1)) < 1e-10
        # the removed part is a decoration change
        resid = np.linalg.lstsq(C.T, l - p1, rcond=None)[1]
        assert resid.size == 0 or resid[0] < 1e-20


def test_gauge_project_rank_deficient_rejected():
    C = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(cf.TriangulationError, match="rank"):
        cf.gauge_project(np.array([1.0, 2.0]), C)
    with pytest.raises(cf.TriangulationError, match="rank"):
        cf.kernel_basis(C)


def test_kernel_basis(fig8_C):
    P = cf.kernel_basis(fig8_C)
    assert P.shape == (2, 1)
    assert_allclose(P.T @ P, np.eye(1), atol=1e-14)
    assert_allclose(fig8_C @ P, 0.0, atol=1e-14)
