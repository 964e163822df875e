import numpy as np
import pytest

from dyadichist.errors import CapacityError, NumericalError
from dyadichist.transport import check_atom_cap, pairwise_ground_cost, transport_cost


class TestTransportCost:
    def test_single_pair(self):
        cost = np.array([[3.0]])
        assert transport_cost(cost, np.array([1.0]), np.array([1.0])) == pytest.approx(3.0)

    def test_identity_permutation(self):
        # diagonal costs zero: optimal plan is the identity
        cost = np.ones((4, 4)) - np.eye(4)
        a = np.full(4, 0.25)
        assert transport_cost(cost, a, a) == pytest.approx(0.0, abs=1e-14)

    def test_known_small_instance(self):
        # classic 2x3 instance solved by hand
        cost = np.array([[4.0, 6.0, 9.0], [5.0, 7.0, 8.0]])
        a = np.array([0.6, 0.4])
        b = np.array([0.3, 0.3, 0.4])
        # optimal: x11=.3, x12=.3, x23=.4 -> 1.2+1.8+3.2 = 6.2... check vs brute force
        assert transport_cost(cost, a, b) == pytest.approx(_brute_force(cost, a, b), abs=1e-10)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_brute_force_lp(self, seed):
        rng = np.random.default_rng(seed)
        m, k = rng.integers(2, 5, size=2)
        cost = rng.random((m, k))
        a = rng.dirichlet(np.ones(m))
        b = rng.dirichlet(np.ones(k))
        assert transport_cost(cost, a, b) == pytest.approx(_brute_force(cost, a, b), abs=1e-9)

    def test_degenerate_supplies(self):
        # many zero-weight rows and ties force degenerate pivots
        cost = np.arange(20.0).reshape(4, 5)
        a = np.array([0.5, 0.0, 0.5, 0.0])
        b = np.array([0.2, 0.2, 0.2, 0.2, 0.2])
        val = transport_cost(cost, a, b)
        keep = np.array([0, 2])
        assert val == pytest.approx(_brute_force(cost[keep], a[keep], b), abs=1e-10)

    def test_demand_rescaled_to_supply(self):
        cost = np.array([[1.0, 2.0]])
        val = transport_cost(cost, np.array([1.0]), np.array([2.0, 6.0]))
        assert val == pytest.approx(0.25 * 1 + 0.75 * 2)

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        cost = rng.random((30, 40))
        a = rng.dirichlet(np.ones(30))
        b = rng.dirichlet(np.ones(40))
        vals = {transport_cost(cost, a, b) for _ in range(3)}
        assert len(vals) == 1

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            transport_cost(np.ones((2, 2)), np.ones(3), np.ones(2))

    def test_all_zero_mass(self):
        with pytest.raises(ValueError):
            transport_cost(np.ones((1, 1)), np.array([0.0]), np.array([1.0]))


class TestGroundCost:
    def test_euclidean_squared(self):
        x = np.array([[0.0, 0.0]])
        y = np.array([[0.3, 0.4]])
        c = pairwise_ground_cost(x, y, 2.0, 2.0)
        assert c[0, 0] == pytest.approx(0.25)

    def test_l1(self):
        x = np.array([[0.1, 0.1]])
        y = np.array([[0.2, 0.4]])
        assert pairwise_ground_cost(x, y, 1.0, 1.0)[0, 0] == pytest.approx(0.4)

    def test_general_p(self):
        x = np.array([[0.0]])
        y = np.array([[0.5]])
        assert pairwise_ground_cost(x, y, 3.0, 4.0)[0, 0] == pytest.approx(0.125)


def test_atom_cap():
    check_atom_cap(5000, 5000)
    with pytest.raises(CapacityError):
        check_atom_cap(5001, 10)


def _brute_force(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Exact LP value by enumerating basic feasible solutions (tiny instances).

    Uses the vertex characterization: a basis is a spanning tree of the
    bipartite graph; enumerate all count-(m+k-1) cell subsets, solve the flow
    equations, keep feasible ones.
    """
    from itertools import combinations

    m, k = cost.shape
    cells = [(i, j) for i in range(m) for j in range(k)]
    best = np.inf
    for basis in combinations(cells, m + k - 1):
        A = np.zeros((m + k, len(basis)))
        for t, (i, j) in enumerate(basis):
            A[i, t] = 1.0
            A[m + j, t] = 1.0
        rhs = np.concatenate([a, b])
        sol, residual, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
        if rank < len(basis):
            continue
        if np.linalg.norm(A @ sol - rhs) > 1e-9 or sol.min() < -1e-9:
            continue
        best = min(best, sum(cost[i, j] * f for (i, j), f in zip(basis, sol)))
    return best
