from fractions import Fraction

import numpy as np
import pytest

from barofv.analysis import (
    AtomicMeasure,
    Ensemble,
    cesaro_average,
    error_report,
    first_variance,
    full_report,
    inject_to_fine,
    lp_norm,
    relative_entropy_field,
    wasserstein_1d,
)
from barofv.eos import Eos
from barofv.mesh import CellField, CellVectorField, StructuredMesh
from barofv.stab import State


def mesh1d(n, lo=0.0, hi=1.0):
    return StructuredMesh((n,), (lo,), (hi,))


# ------------------------------------------------------------- wasserstein


def monotone_coupling_cost(mu, nu, s):
    """Brute-force oracle: walk the unique monotone coupling with exact
    Fraction masses and sum gamma_ij |x_i - y_j|^s."""
    xi = sorted(zip(mu.locations, mu.weights))
    yj = sorted(zip(nu.locations, nu.weights))
    i = j = 0
    wi = Fraction(xi[0][1]).limit_denominator(10**9)
    vj = Fraction(yj[0][1]).limit_denominator(10**9)
    cost = 0.0
    while True:
        m = min(wi, vj)
        cost += float(m) * abs(xi[i][0] - yj[j][0]) ** s
        wi -= m
        vj -= m
        if wi == 0:
            i += 1
            if i == len(xi):
                break
            wi = Fraction(xi[i][1]).limit_denominator(10**9)
        if vj == 0:
            j += 1
            if j == len(yj):
                break
            vj = Fraction(yj[j][1]).limit_denominator(10**9)
    return cost ** (1.0 / s)


# fixed test set: dyadic weights and locations so both routes are fp-exact
DYADIC_MEASURES = [
    AtomicMeasure(np.array([0.0]), np.array([1.0])),
    AtomicMeasure(np.array([1.5]), np.array([1.0])),
    AtomicMeasure(np.array([0.0, 2.0]), np.array([0.5, 0.5])),
    AtomicMeasure(np.array([-1.0, 0.5]), np.array([0.25, 0.75])),
    AtomicMeasure(np.array([0.0, 1.0, 3.0]), np.array([0.25, 0.25, 0.5])),
    AtomicMeasure(np.array([-2.0, -0.5, 0.5, 2.0]), np.array([0.125, 0.375, 0.25, 0.25])),
]


@pytest.mark.parametrize("s", [1.0, 2.0])
def test_wasserstein_matches_monotone_coupling_exactly(s):
    for mu in DYADIC_MEASURES:
        for nu in DYADIC_MEASURES:
            assert wasserstein_1d(mu, nu, s) == monotone_coupling_cost(mu, nu, s)


def test_wasserstein_dirac_pair():
    assert wasserstein_1d(AtomicMeasure.dirac(-1.5), AtomicMeasure.dirac(2.0)) == 3.5


def test_wasserstein_spec_examples():
    mu = AtomicMeasure(np.array([0.0, 2.0]), np.array([0.5, 0.5]))
    nu = AtomicMeasure.dirac(1.0)
    assert wasserstein_1d(mu, nu, 1.0) == pytest.approx(1.0, abs=0)
    mu2 = AtomicMeasure(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    nu2 = AtomicMeasure(np.array([0.0, 3.0]), np.array([0.5, 0.5]))
    assert wasserstein_1d(mu2, nu2, 1.0) == pytest.approx(1.0, abs=0)


def random_measure(rng, max_atoms=5):
    n = int(rng.integers(1, max_atoms + 1))
    locs = rng.normal(size=n) * 2
    w = rng.uniform(0.1, 1.0, size=n)
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()  # exact normalization
    return AtomicMeasure(locs, w)


def test_wasserstein_metric_properties():
    rng = np.random.default_rng(99)
    for _ in range(40):
        mu, nu, la = (random_measure(rng) for _ in range(3))
        d12 = wasserstein_1d(mu, nu)
        d21 = wasserstein_1d(nu, mu)
        assert abs(d12 - d21) <= 1e-12 * max(1.0, d12)
        d13 = wasserstein_1d(mu, la)
        d23 = wasserstein_1d(nu, la)
        assert d13 <= d12 + d23 + 1e-12
        assert wasserstein_1d(mu, mu) == 0.0


def test_wasserstein_zero_iff_equal_after_merging():
    mu = AtomicMeasure(np.array([1.0, 1.0, 2.0]), np.array([0.25, 0.25, 0.5]))
    nu = AtomicMeasure(np.array([2.0, 1.0]), np.array([0.5, 0.5]))
    assert wasserstein_1d(mu, nu) == 0.0
    a, b = mu.merged(), nu.merged()
    np.testing.assert_array_equal(a.locations, b.locations)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-15)
    nu2 = AtomicMeasure(np.array([2.0, 1.1]), np.array([0.5, 0.5]))
    assert wasserstein_1d(mu, nu2) > 0


def test_wasserstein_to_dirac_closed_form():
    rng = np.random.default_rng(17)
    for s in (1.0, 2.0, 3.0):
        for _ in range(10):
            mu = random_measure(rng)
            y = float(rng.normal())
            expect = float(np.sum(mu.weights * np.abs(mu.locations - y) ** s)) ** (1.0 / s)
            got = wasserstein_1d(mu, AtomicMeasure.dirac(y), s)
            assert got == pytest.approx(expect, rel=1e-12)


def test_measure_validation():
    with pytest.raises(ValueError):
        AtomicMeasure(np.array([0.0, 1.0]), np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        AtomicMeasure(np.array([0.0]), np.array([-1.0]))
    with pytest.raises(ValueError):
        wasserstein_1d(AtomicMeasure.dirac(0), AtomicMeasure.dirac(1), s=0.5)


# ------------------------------------------------------------- injection


def test_inject_examples():
    coarse = mesh1d(2)
    fine = mesh1d(4)
    f = CellField(coarse, np.array([0.0, 1.0]))
    out = inject_to_fine(f, fine)
    assert out.values.tolist() == [0.0, 0.0, 1.0, 1.0]

    c = CellField.full(coarse, 3.7)
    assert np.all(inject_to_fine(c, fine).values == 3.7)

    rng = np.random.default_rng(2)
    g = CellField(coarse, rng.uniform(0, 2, size=2))
    assert inject_to_fine(g, fine).integral() == pytest.approx(g.integral(), rel=1e-15)

    with pytest.raises(ValueError):
        inject_to_fine(f, mesh1d(6))


def test_inject_preserves_l1_norm():
    coarse = StructuredMesh((4, 4), (0.0, 0.0), (1.0, 1.0))
    fine = StructuredMesh((16, 16), (0.0, 0.0), (1.0, 1.0))
    rng = np.random.default_rng(3)
    f = CellField(coarse, rng.uniform(0, 1, size=(4, 4)))
    assert lp_norm(inject_to_fine(f, fine), 1) == pytest.approx(lp_norm(f, 1), rel=1e-15)


# ------------------------------------------------------------- cesaro / variance


def test_cesaro_cases():
    mesh = mesh1d(3)
    a = CellField(mesh, np.zeros(3))
    b = CellField(mesh, np.full(3, 2.0))
    assert np.all(cesaro_average([b, b, b]).values == 2.0)
    assert np.all(cesaro_average([a, b]).values == 1.0)
    rng = np.random.default_rng(5)
    fields = [CellField(mesh, rng.normal(size=3)) for _ in range(3)]
    naive = (fields[0].values + fields[1].values + fields[2].values) / 3
    np.testing.assert_allclose(cesaro_average(fields).values, naive, rtol=1e-15)
    with pytest.raises(ValueError):
        cesaro_average([])


def test_first_variance_cases():
    mesh = mesh1d(2)
    a = CellField(mesh, np.zeros(2))
    b = CellField(mesh, np.full(2, 2.0))
    assert np.all(first_variance([a, a, a]).values == 0.0)
    # Ubar_1 = 0, Ubar_2 = 1 -> (|0-0| + |2-1|)/2 = 0.5
    np.testing.assert_allclose(first_variance([a, b]).values, 0.5, atol=0)

    rng = np.random.default_rng(6)
    fields = [CellField(mesh, rng.normal(size=2)) for _ in range(5)]
    got = first_variance(fields)
    # naive double loop
    vals = np.stack([f.values for f in fields])
    acc = np.zeros(2)
    for j in range(1, 6):
        acc += np.abs(vals[j - 1] - vals[:j].mean(axis=0))
    np.testing.assert_allclose(got.values, acc / 5, rtol=1e-14)


# ------------------------------------------------------------- relative entropy


def test_relative_entropy_examples():
    mesh = mesh1d(1, 0.0, 1.0)
    eos = Eos(1.0, 2.0)
    rho = CellField(mesh, np.array([2.0]))
    m = CellVectorField(mesh, np.array([[0.0]]))
    r = CellField(mesh, np.array([1.0]))
    U = CellVectorField(mesh, np.array([[0.0]]))
    e = relative_entropy_field(rho, m, r, U, eos)
    assert e.values[0] == pytest.approx(1.0, rel=1e-14)  # psi(2)-psi(1)-psi'(1)

    rho2 = CellField(mesh, np.array([1.0]))
    m2 = CellVectorField(mesh, np.array([[1.0]]))
    e2 = relative_entropy_field(rho2, m2, r, U, Eos(1.0, 1.4))
    assert e2.values[0] == pytest.approx(0.5, rel=1e-14)

    U3 = CellVectorField(mesh, np.array([[0.7]]))
    m3 = CellVectorField(mesh, np.array([[0.7]]))
    e3 = relative_entropy_field(rho2, m3, r, U3, Eos(1.0, 1.4))
    assert e3.values[0] == pytest.approx(0.0, abs=1e-15)


def test_relative_entropy_nonnegative_random():
    rng = np.random.default_rng(77)
    mesh = mesh1d(50)
    eos = Eos(1.0, 1.4)
    for _ in range(10):
        rho = CellField(mesh, rng.uniform(0.2, 3.0, size=50))
        r = CellField(mesh, rng.uniform(0.2, 3.0, size=50))
        m = CellVectorField(mesh, rng.normal(size=(1, 50)))
        U = CellVectorField(mesh, rng.normal(size=(1, 50)))
        e = relative_entropy_field(rho, m, r, U, eos)
        assert np.all(e.values >= -1e-13)


# ------------------------------------------------------------- norms


def test_lp_norm_cases():
    mesh = StructuredMesh((4,), (0.0,), (2.0,))  # measure 2
    c = CellField.full(mesh, 3.0)
    assert lp_norm(c, 1) == pytest.approx(6.0, rel=1e-15)
    assert lp_norm(c, 2) == pytest.approx(3.0 * np.sqrt(2.0), rel=1e-15)
    rng = np.random.default_rng(8)
    f = CellField(mesh, rng.normal(size=4))
    assert lp_norm(f, 1) == pytest.approx(0.5 * np.abs(f.values).sum(), rel=1e-14)
    with pytest.raises(ValueError):
        lp_norm(f, 3)


# ------------------------------------------------------------- error report


def build_ensemble(member_arrays, ref_array, mesh):
    members = [{"rho": CellField(mesh, np.asarray(a, dtype=float))} for a in member_arrays]
    reference = {"rho": CellField(mesh, np.asarray(ref_array, dtype=float))}
    return Ensemble(ks=list(2 ** np.arange(5, 5 + len(members))), members=members, reference=reference)


def test_error_report_identical_fields_zero():
    mesh = mesh1d(4)
    a = np.array([1.0, 2.0, 3.0, 4.0])
    ens = build_ensemble([a, a], a, mesh)
    for row in error_report(ens, "rho"):
        assert (row.E1, row.E2, row.E3, row.E4, row.E5, row.E6) == (0, 0, 0, 0, 0, 0)


def test_error_report_single_member_e4_equals_e1():
    mesh = mesh1d(6)
    rng = np.random.default_rng(10)
    ens = build_ensemble([rng.normal(size=6)], rng.normal(size=6), mesh)
    (row,) = error_report(ens, "rho")
    assert row.E4 == row.E1  # Dirac-to-Dirac transport, bitwise equal
    assert row.E1 > 0


def naive_error_report(member_arrays, ref, vol):
    """Fully naive recomputation of all six error formulas (python loops)."""
    seq = [np.asarray(a, float) for a in member_arrays] + [np.asarray(ref, float)]
    n = len(member_arrays)
    means = []
    for j in range(1, len(seq) + 1):
        means.append(sum(seq[:j]) / j)
    variances = []
    for j in range(1, len(seq) + 1):
        acc = np.zeros_like(seq[0])
        for i in range(j):
            acc += np.abs(seq[i] - means[i])
        variances.append(acc / j)

    def l1(x):
        return vol * float(np.abs(x).sum())

    def l2(x):
        return float(np.sqrt(vol * np.sum(x**2)))

    rows = []
    for j in range(1, n + 1):
        e1 = l1(seq[j - 1] - seq[-1])
        e2 = l1(means[j - 1] - means[-1])
        e3 = l1(variances[j - 1] - variances[-1])
        e5 = l2(means[j - 1] - means[-1])
        # pointwise W1 against the Dirac at the reference value
        w = np.zeros_like(seq[0])
        for cell in np.ndindex(seq[0].shape):
            w[cell] = np.mean([abs(seq[i][cell] - seq[-1][cell]) for i in range(j)])
        rows.append((e1, e2, e3, l1(w), e5, l2(w)))
    return rows


def test_error_report_matches_naive_oracle():
    mesh = mesh1d(5, 0.0, 2.0)
    rng = np.random.default_rng(12)
    members = [rng.normal(size=5) for _ in range(3)]
    ref = rng.normal(size=5)
    ens = build_ensemble(members, ref, mesh)
    got = error_report(ens, "rho")
    expect = naive_error_report(members, ref, mesh.cell_volume)
    for row, (e1, e2, e3, e4, e5, e6) in zip(got, expect):
        assert row.E1 == pytest.approx(e1, rel=1e-13)
        assert row.E2 == pytest.approx(e2, rel=1e-13)
        assert row.E3 == pytest.approx(e3, rel=1e-13)
        assert row.E4 == pytest.approx(e4, rel=1e-13)
        assert row.E5 == pytest.approx(e5, rel=1e-13)
        assert row.E6 == pytest.approx(e6, rel=1e-13)


def test_error_report_e4_matches_per_cell_wasserstein():
    # the vectorized E4 field must agree with the quantile-transport routine
    # applied cell by cell
    mesh = mesh1d(6, 0.0, 3.0)
    rng = np.random.default_rng(15)
    members = [rng.normal(size=6) for _ in range(3)]
    ref = rng.normal(size=6)
    ens = build_ensemble(members, ref, mesh)
    rows = error_report(ens, "rho")
    for j, row in enumerate(rows, start=1):
        wvals = np.empty(6)
        for c in range(6):
            mu = AtomicMeasure.uniform([members[i][c] for i in range(j)])
            wvals[c] = wasserstein_1d(mu, AtomicMeasure.dirac(ref[c]), 1.0)
        assert row.E4 == pytest.approx(lp_norm(CellField(mesh, wvals), 1), rel=1e-13)


def test_full_report_includes_relative_entropy():
    mesh_c = mesh1d(4)
    mesh_f = mesh1d(8)
    rng = np.random.default_rng(14)

    def mk_state(mesh):
        return State(
            CellField(mesh, rng.uniform(0.5, 2.0, size=mesh.shape)),
            CellVectorField(mesh, rng.normal(size=(1,) + mesh.shape)),
        )

    eos = Eos(1.0, 1.4)
    runs = [(4, mk_state(mesh_c)), (8, mk_state(mesh_f))]
    ref = mk_state(mesh_f)
    ens = Ensemble.from_states(runs, ref, eos)
    rows = full_report(ens)
    assert {r.variable for r in rows} == {"rho", "m1"}
    for r in rows:
        assert np.isfinite(r.rel_entropy_L1)
        assert r.rel_entropy_L1 >= 0
    # identical state at both variables share the per-k entropy value
    by_k = {}
    for r in rows:
        by_k.setdefault(r.k, set()).add(r.rel_entropy_L1)
    assert all(len(v) == 1 for v in by_k.values())


def test_ensemble_validation():
    mesh = mesh1d(4)
    a = CellField(mesh, np.zeros(4))
    with pytest.raises(ValueError):
        Ensemble(ks=[32, 16], members=[{"rho": a}, {"rho": a}], reference={"rho": a})
    with pytest.raises(ValueError):
        Ensemble(ks=[32], members=[{"x": a}], reference={"rho": a})
