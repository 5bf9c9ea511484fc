"""Built-in invariant suite behind the `selftest` CLI subcommand.

Each check prints one ok/FAIL line; the runner returns the failure count so
the CLI exits nonzero on any failure.
"""

import math
import os

import numpy as np

from .asymptotics import multiplicity_rate, saddle_solve, log_multiplicity_saddle
from .combinatorics import (
    HALF,
    ONE,
    admissible_two_j,
    multiplicity_by_quadrature,
    multiplicity_table,
    spin_half_multiplicity,
    spin_half_multiplicity_log,
    zero_magnetization_dim,
)
from .ensembles import (
    WORKERS_ENV,
    ensemble_entropy_samples,
    entanglement_entropy,
    max_spin_state_entropy,
    page_average,
    sd2_average_closed,
    singlet_average_exact,
)
from .special import EULER_GAMMA, digamma
from .spectra import ChainSpec, hamiltonian_matrix, momentum_blocks, spin_squared_matrix
from .su2 import (
    apply_total_spin_squared,
    clebsch_gordan,
    coupled_sector_basis,
    sector_basis,
    stretched_weight,
)

_TRIANGLE = {
    0: {0: 1},
    1: {1: 1},
    2: {0: 1, 2: 1},
    3: {1: 2, 3: 1},
    4: {0: 2, 2: 3, 4: 1},
    5: {1: 5, 3: 4, 5: 1},
    6: {0: 5, 2: 9, 4: 5, 6: 1},
}


def _check_multiplicities():
    for sites in range(25):
        table = multiplicity_table(HALF, sites)
        assert table.total_dimension() == 2**sites
        for two_j in admissible_two_j(HALF, sites):
            assert spin_half_multiplicity(sites, two_j) == table.multiplicity(two_j)
        assert table.irrep_count() == zero_magnetization_dim(sites)
    for sites in range(13):
        assert multiplicity_table(ONE, sites).total_dimension() == 3**sites


def _check_triangle():
    for sites, row in _TRIANGLE.items():
        table = dict(multiplicity_table(HALF, sites).items())
        table = {tj: n for tj, n in table.items() if n}
        assert table == row, (sites, table, row)


def _check_quadrature():
    for species, sites_list in ((HALF, (2, 6, 10, 20)), (ONE, (3, 8, 12))):
        for sites in sites_list:
            table = multiplicity_table(species, sites)
            for two_j in admissible_two_j(species, sites):
                assert multiplicity_by_quadrature(species, sites, two_j) == table.multiplicity(
                    two_j
                )


def _check_rate_and_saddle():
    assert abs(multiplicity_rate(HALF, 0.0) - math.log(2)) < 1e-12
    assert abs(multiplicity_rate(ONE, 0.0) - math.log(3)) < 1e-12
    assert multiplicity_rate(HALF, 1.0) == 0.0
    assert multiplicity_rate(ONE, 1.0) == 0.0
    assert abs(multiplicity_rate(HALF, 0.5) - 0.5623351446188083) < 1e-12
    sd = saddle_solve(HALF, 0.6)
    assert abs(sd.saddle_point - 0.5) < 1e-12
    assert saddle_solve(ONE, 1.0).endpoint
    for species in (HALF, ONE):
        for j in (0.2, 0.5, 0.8):
            sd = saddle_solve(species, j)
            assert abs(sd.rate - multiplicity_rate(species, j)) < 1e-12
    ln_exact = spin_half_multiplicity_log(1000, 500)
    ln_saddle = log_multiplicity_saddle(HALF, 1000, 500)
    assert abs(ln_saddle - ln_exact) / ln_exact < 0.02


def _check_clebsch_gordan():
    assert abs(clebsch_gordan(1, 1, 1, -1, 0, 0) - 1 / math.sqrt(2)) < 1e-14
    assert clebsch_gordan(4, 4, 6, 6, 10, 10) == 1.0
    for two_ja in (1, 2, 3, 5):
        for two_m in range(-two_ja, two_ja + 1, 2):
            expect = (-1.0) ** ((two_ja - two_m) // 2) / math.sqrt(two_ja + 1)
            got = clebsch_gordan(two_ja, two_m, two_ja, -two_m, 0, 0)
            assert abs(got - expect) < 1e-13
    for two_j1, two_j2, two_m in ((3, 4, 1), (4, 4, 0), (2, 5, 3)):
        js = range(abs(two_j1 - two_j2), two_j1 + two_j2 + 1, 2)
        for two_ja_ in js:
            for two_jb_ in js:
                acc = 0.0
                for two_m1 in range(-two_j1, two_j1 + 1, 2):
                    two_m2 = two_m - two_m1
                    if abs(two_m2) > two_j2:
                        continue
                    acc += clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_ja_, two_m) * \
                        clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_jb_, two_m)
                expect = 1.0 if two_ja_ == two_jb_ else 0.0
                assert abs(acc - expect) < 1e-12


def _check_stretched():
    total = sum(stretched_weight(6, 10, two_m) for two_m in range(-6, 7, 2))
    assert abs(total - 1.0) < 1e-12
    assert abs(stretched_weight(1, 1, 1) - 0.5) < 1e-14
    var = sum(
        (two_m / 2.0) ** 2 * stretched_weight(500, 500, two_m) for two_m in range(-500, 501, 2)
    )
    assert abs(var - 62.5) / 62.5 < 0.02


def _check_bases():
    basis = sector_basis(HALF, 2, 0, 0)
    assert len(basis) == 1
    amp = sorted(basis.vectors[0])
    assert abs(amp[0] + 1 / math.sqrt(2)) < 1e-12 and abs(amp[1] - 1 / math.sqrt(2)) < 1e-12
    for sites in (2, 4, 6):
        for two_j in admissible_two_j(HALF, sites):
            b = sector_basis(HALF, sites, two_j, 0)
            assert len(b) == spin_half_multiplicity(sites, two_j)
            if len(b):
                gram = b.vectors @ b.vectors.T
                assert np.max(np.abs(gram - np.eye(len(b)))) < 1e-12
                for v in b.vectors:
                    res = apply_total_spin_squared(v, HALF, b.configs) - (
                        (two_j / 2) * (two_j / 2 + 1)
                    ) * v
                    assert np.max(np.abs(res)) < 1e-10
    direct = sector_basis(HALF, 6, 2, 0)
    coupled = coupled_sector_basis(HALF, 6, 3, 2, 0)
    assert len(coupled) == len(direct) == 9
    overlap = coupled.vectors @ direct.vectors.T
    sv = np.linalg.svd(overlap, compute_uv=False)
    assert np.max(np.abs(sv - 1.0)) < 1e-10


def _check_closed_forms():
    assert page_average(1, 1) == 0.0
    assert abs(page_average(2, 2) - 1.0 / 3.0) < 1e-12
    assert abs(page_average(2**10, 2**10) - (10 * math.log(2) - 0.5)) < 0.01
    assert abs(digamma(1.0) + EULER_GAMMA) < 1e-12
    assert abs(digamma(2.0) - digamma(1.0) - 1.0) < 1e-12
    assert abs(singlet_average_exact(4, 2) - (0.5 + math.log(3) / 2)) < 1e-12
    assert abs(singlet_average_exact(12, 5) - singlet_average_exact(12, 7)) < 1e-12
    for sites in (8, 12):
        closed = sd2_average_closed(sites, sites, sites // 2)
        assert abs(closed - max_spin_state_entropy(sites, sites // 2)) < 1e-12


def _check_sampling():
    a = ensemble_entropy_samples(8, 2, 4, 16, 11, ("full", "sd1", "sd2"))
    b = ensemble_entropy_samples(8, 2, 4, 16, 11, ("full", "sd1", "sd2"))
    for key in a:
        assert np.array_equal(a[key], b[key])
    old = os.environ.get(WORKERS_ENV)
    try:
        os.environ[WORKERS_ENV] = "2"
        c = ensemble_entropy_samples(8, 2, 4, 16, 11, ("full", "sd1", "sd2"))
    finally:
        if old is None:
            os.environ.pop(WORKERS_ENV, None)
        else:
            os.environ[WORKERS_ENV] = old
    for key in a:
        assert np.array_equal(a[key], c[key])
    singlet = ensemble_entropy_samples(8, 0, 4, 16, 3, ("full", "sd1"))
    assert np.allclose(singlet["full"], singlet["sd1"], atol=1e-12)


def _check_entropy_units():
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
    assert abs(entanglement_entropy(singlet, 1) - math.log(2)) < 1e-12
    product = np.zeros(16)
    product[0] = 1.0
    assert entanglement_entropy(product, 2) == 0.0


def _check_spectra():
    for species, sites in ((HALF, 6), (ONE, 4)):
        spec = ChainSpec(species, sites, 3.0 if species is HALF else 0.0)
        dense = hamiltonian_matrix(spec)
        reference = np.sort(np.linalg.eigvalsh(dense))
        blocks = momentum_blocks(spec)
        assert sum(b.dim for b in blocks) == dense.shape[0]
        union = np.sort(np.concatenate([np.linalg.eigvalsh(b.matrix) for b in blocks]))
        assert np.max(np.abs(union - reference)) < 1e-10
        j2 = spin_squared_matrix(species, sites)
        comm = dense @ j2 - j2 @ dense
        assert np.max(np.abs(comm)) < 1e-9


_CHECKS = (
    ("multiplicity identities", _check_multiplicities),
    ("fusion triangle rows", _check_triangle),
    ("character-integral quadrature", _check_quadrature),
    ("rate function and saddle points", _check_rate_and_saddle),
    ("clebsch-gordan values and orthogonality", _check_clebsch_gordan),
    ("stretched-coupling weights", _check_stretched),
    ("sector bases", _check_bases),
    ("closed-form averages", _check_closed_forms),
    ("seeded sampling determinism", _check_sampling),
    ("entropy kernels", _check_entropy_units),
    ("momentum-block diagonalization", _check_spectra),
)


def run_selftest():
    failures = 0
    for name, check in _CHECKS:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {exc!r}")
        else:
            print(f"ok   {name}")
    print(f"{len(_CHECKS) - failures}/{len(_CHECKS)} checks passed")
    return 1 if failures else 0
