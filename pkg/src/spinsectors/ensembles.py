"""Entanglement entropy of pure states and sector-ensemble averages.

Random states with fixed (J, J_z=0) are sampled without ever forming the
exponentially large sector basis: in the bipartite coupled basis a state is a
collection of Gaussian blocks W^{J_A J_B} (one per admissible spin pairing
across the cut) and the reduced density matrix is block diagonal in the
subsystem magnetization m, with blocks assembled from the W's weighted by
Clebsch-Gordan coefficients.  The block-diagonal approximations reuse the
same draws: `sd1` zeroes the interference between different J_A, `sd2`
additionally keeps only the J_B = J - J_A pairings (renormalized), so paired
comparisons between the three ensembles are free of independent-sampling
noise.

Closed forms: the Page average, its leading terms with and without a U(1)
constraint, the exact J=0 sector sum, the sd2 sum, and the large-L
asymptotics of the J=0 and J=O(L) sectors.
"""

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .asymptotics import multiplicity_rate
from .combinatorics import HALF, SectorLabel, spin_half_multiplicity
from .special import digamma, entropy_nats
from .su2 import clebsch_gordan, stretched_weight_log

__all__ = [
    "EntropyEstimate",
    "BipartitionSpec",
    "RandomStateSpec",
    "entanglement_entropy",
    "bipartition_maps",
    "slice_entanglement_entropy",
    "schmidt_square_entropy",
    "page_average",
    "haar_average_leading",
    "fixed_filling_average",
    "singlet_average_exact",
    "singlet_average_asymptotic",
    "max_spin_entropy_asymptotic",
    "max_spin_state_entropy",
    "sd2_average_closed",
    "sd2_asymptotic",
    "paired_spin_crossover",
    "sd1_semianalytic",
    "ensemble_entropy_samples",
    "random_state_average",
    "sd1_average",
    "sd2_average",
    "ensemble_average",
    "default_sample_count",
    "resolve_workers",
]

EIGENVALUE_FLOOR = 1e-14
WORKERS_ENV = "SPINSECTORS_WORKERS"


# ---------------------------------------------------------------------------
# entropy kernels


def schmidt_square_entropy(lams):
    """-sum lam ln lam over Schmidt squares, dropping values below the floor."""
    lams = np.asarray(lams)
    lams = lams[lams > EIGENVALUE_FLOOR]
    if lams.size == 0:
        return 0.0
    return max(float(-np.dot(lams, np.log(lams))), 0.0)


def _check_normalized(state):
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalized: |psi| = {norm}")


def entanglement_entropy(state, cut, local_dim=2):
    """Von Neumann entropy of the first `cut` sites of a product-basis state."""
    state = np.asarray(state)
    sites = round(math.log(state.size, local_dim))
    if local_dim**sites != state.size:
        raise ValueError(f"state of length {state.size} is not a {local_dim}**L product state")
    if not 0 < cut < sites:
        raise ValueError(f"cut must satisfy 0 < cut < {sites}, got {cut}")
    _check_normalized(state)
    matrix = state.reshape(local_dim**cut, -1)
    sv = np.linalg.svd(matrix, compute_uv=False)
    return schmidt_square_entropy(sv**2)


def bipartition_maps(configs, a_sites):
    """Index maps turning a slice state into per-m_A Schmidt blocks.

    Returns a list of (sel, rows, cols, shape): configuration indices with a
    given subsystem magnetization, their row/column ranks, and the block shape.
    """
    configs = np.asarray(configs)
    a_sites = list(a_sites)
    b_sites = [s for s in range(configs.shape[1]) if s not in a_sites]
    a_part = configs[:, a_sites]
    b_part = configs[:, b_sites]
    ma = a_part.sum(axis=1)
    blocks = []
    for val in np.unique(ma):
        sel = np.nonzero(ma == val)[0]
        ua, rows = np.unique(a_part[sel], axis=0, return_inverse=True)
        ub, cols = np.unique(b_part[sel], axis=0, return_inverse=True)
        blocks.append((sel, rows, cols, (len(ua), len(ub))))
    return blocks


def slice_entanglement_entropy(state, configs, a_sites, maps=None):
    """Entanglement entropy of a state on a magnetization-resolved slice.

    `a_sites` lists the subsystem sites (need not start at 0); the reduced
    density matrix is diagonalized block by block in the subsystem
    magnetization.
    """
    state = np.asarray(state)
    _check_normalized(state)
    if maps is None:
        maps = bipartition_maps(configs, a_sites)
    lams = []
    for sel, rows, cols, shape in maps:
        block = np.zeros(shape, dtype=state.dtype)
        block[rows, cols] = state[sel]
        if shape[0] <= shape[1]:
            gram = block @ block.conj().T
        else:
            gram = block.conj().T @ block
        lams.append(np.clip(np.linalg.eigvalsh(gram), 0.0, None))
    return schmidt_square_entropy(np.concatenate(lams))


# ---------------------------------------------------------------------------
# closed forms


def page_average(dim_a, dim_b):
    """Haar-average entanglement entropy of a dim_a x dim_b bipartite space."""
    if dim_a < 1 or dim_b < 1:
        raise ValueError(f"dimensions must be >= 1, got {dim_a}, {dim_b}")
    lo, hi = sorted((int(dim_a), int(dim_b)))
    return digamma(lo * hi + 1) - digamma(hi + 1) - (lo - 1) / (2.0 * hi)


def _mirror_cut(sites, cut):
    if not 0 < cut < sites:
        raise ValueError(f"cut must satisfy 0 < cut < {sites}, got {cut}")
    return min(cut, sites - cut)


def haar_average_leading(sites, cut, local_dim=2):
    """Leading Page terms: L_A ln d, minus 1/2 exactly at half bipartition."""
    half = Fraction(cut, sites) == Fraction(1, 2)
    return _mirror_cut(sites, cut) * math.log(local_dim) - (0.5 if half else 0.0)


def fixed_filling_average(filling, sites, cut):
    """Leading average entropy terms for random states at fixed U(1) filling."""
    n = Fraction(filling)
    if not 0 < n < 1:
        raise ValueError(f"filling must lie in (0, 1), got {filling}")
    cut = _mirror_cut(sites, cut)
    f = Fraction(cut, sites)
    nf = float(n)
    value = -(nf * math.log(nf) + (1 - nf) * math.log(1 - nf)) * cut
    if f == Fraction(1, 2):
        value -= math.sqrt(nf * (1 - nf) / (2 * math.pi)) * abs(
            math.log((1 - nf) / nf)
        ) * math.sqrt(sites)
        if n == Fraction(1, 2):
            value -= 0.5
    value += (float(f) + math.log(1 - float(f))) / 2.0
    return value


def singlet_average_exact(sites, cut):
    """Exact average entanglement entropy of random J=0, J_z=0 sector states.

    Finite sum over the subsystem spin J_A: each (J_A = J_B) pairing
    contributes a Page term for its multiplicity block plus the ln(1+2J_A)
    entropy of the uniform singlet Clebsch-Gordan weights.
    """
    if sites % 2 or sites < 2:
        raise ValueError(f"the J=0 sector needs an even number of sites, got {sites}")
    cut_a = _mirror_cut(sites, cut)
    cut_b = sites - cut_a
    n0 = spin_half_multiplicity(sites, 0)
    psi_n0 = digamma(n0 + 1)
    total = 0.0
    for two_ja in range(cut_a % 2, cut_a + 1, 2):
        na = spin_half_multiplicity(cut_a, two_ja)
        nb = spin_half_multiplicity(cut_b, two_ja)
        total += (na * nb / n0) * (
            psi_n0 - digamma(nb + 1) - (na - 1) / (2.0 * nb) + math.log(1.0 + two_ja)
        )
    return total


def singlet_average_asymptotic(sites, fraction):
    """Leading large-L terms of the J=0 sector average at fixed f = L_A/L."""
    f = Fraction(fraction)
    if not 0 < f < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    f = min(f, 1 - f)
    ff = float(f)
    value = math.log(2.0) * ff * sites + 1.5 * (ff + math.log(1.0 - ff))
    if f == Fraction(1, 2):
        value -= 0.5
    return value


def max_spin_entropy_asymptotic(sites, fraction):
    """Leading entropy of the unique J = L/2 state: (1/2) ln[pi e f(1-f) L / 2]."""
    ff = float(Fraction(fraction))
    if not 0.0 < ff < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    return 0.5 * math.log(math.pi * math.e * ff * (1.0 - ff) * sites / 2.0)


def max_spin_state_entropy(sites, cut):
    """Exact entanglement entropy of the J = L/2, J_z = 0 spin-1/2 state.

    The state is the uniform superposition of all zero-magnetization
    configurations; its Schmidt weights are the squared stretched
    Clebsch-Gordan coefficients, evaluated in log domain.
    """
    if sites % 2:
        raise ValueError(f"the J_z=0 stretched state needs even sites, got {sites}")
    if not 0 < cut < sites:
        raise ValueError(f"cut must satisfy 0 < cut < {sites}, got {cut}")
    two_ja, two_jb = cut, sites - cut
    s = 0.0
    for two_m in range(-min(two_ja, two_jb), min(two_ja, two_jb) + 1, 2):
        lw = stretched_weight_log(two_ja, two_jb, two_m)
        s -= math.exp(lw) * lw
    return s


# ---------------------------------------------------------------------------
# coupled-pair geometry for the sector ensembles (spin-1/2, J_z = 0)


class CoupledPairGeometry:
    """Admissible (J_A, J_B) pairings of a J_z=0 spin-1/2 sector bipartition.

    Holds the multiplicities of both blocks, the Clebsch-Gordan columns
    c_m(J; J_A, J_B), and row/column offsets used to assemble reduced density
    matrix blocks.  The identity sum_{pairs} n_A n_B = n_J is asserted at
    construction, cross-checking the counting machinery.
    """

    def __init__(self, sites, two_j, cut):
        if sites % 2:
            raise ValueError(f"the J_z=0 ensembles need an even number of sites, got {sites}")
        if not 0 < cut < sites:
            raise ValueError(f"cut must satisfy 0 < cut < {sites}, got {cut}")
        SectorLabel(HALF, sites, two_j, 0)
        self.sites = sites
        self.cut = cut
        self.two_j = two_j
        cut_b = sites - cut
        self.na = {}
        self.nb = {}
        self.pairs = []
        ja_lo = max(cut % 2, two_j - cut_b)
        ja_hi = min(cut, two_j + cut_b)
        if ja_lo % 2 != cut % 2:
            ja_lo += 1
        for two_ja in range(ja_lo, ja_hi + 1, 2):
            jb_lo = max(cut_b % 2, abs(two_j - two_ja))
            jb_hi = min(cut_b, two_j + two_ja)
            if jb_lo % 2 != cut_b % 2:
                jb_lo += 1
            partners = list(range(jb_lo, jb_hi + 1, 2))
            if not partners:
                continue
            self.na[two_ja] = spin_half_multiplicity(cut, two_ja)
            for two_jb in partners:
                if two_jb not in self.nb:
                    self.nb[two_jb] = spin_half_multiplicity(cut_b, two_jb)
                self.pairs.append((two_ja, two_jb))
        if not self.pairs:
            raise ValueError(
                f"empty sector: no (J_A, J_B) pairing for L={sites}, two_j={two_j}, cut={cut}"
            )
        total = sum(self.na[ja] * self.nb[jb] for ja, jb in self.pairs)
        expected = spin_half_multiplicity(sites, two_j)
        assert total == expected, (total, expected)
        self.sector_dim = total
        self.ja_list = sorted(self.na)
        self.jb_list = sorted(self.nb)
        self.partners = {
            ja: sorted(jb for a, jb in self.pairs if a == ja) for ja in self.ja_list
        }
        self.cg = {}
        for two_ja, two_jb in self.pairs:
            mm = min(two_ja, two_jb)
            col = np.array(
                [
                    clebsch_gordan(two_ja, two_m, two_jb, -two_m, two_j, 0)
                    for two_m in range(-mm, mm + 1, 2)
                ]
            )
            self.cg[(two_ja, two_jb)] = col
        self.m_max = max(min(ja, jb) for ja, jb in self.pairs)

    def cg_coefficient(self, two_ja, two_jb, two_m):
        mm = min(two_ja, two_jb)
        if abs(two_m) > mm:
            return 0.0
        return float(self.cg[(two_ja, two_jb)][(two_m + mm) // 2])


@lru_cache(maxsize=256)
def coupled_geometry(sites, two_j, cut):
    return CoupledPairGeometry(sites, two_j, cut)


# ---------------------------------------------------------------------------
# Monte Carlo over random sector states


def _draw_blocks(rng, geo, complex_coefficients):
    blocks = {}
    total = 0.0
    for pair in geo.pairs:
        shape = (geo.na[pair[0]], geo.nb[pair[1]])
        w = rng.standard_normal(shape)
        if complex_coefficients:
            w = w + 1j * rng.standard_normal(shape)
        blocks[pair] = w
        total += float(np.sum(np.abs(w) ** 2))
    scale = 1.0 / math.sqrt(total)
    for pair in blocks:
        blocks[pair] = blocks[pair] * scale
    return blocks


def _entropies_from_blocks(geo, blocks, methods):
    out = {}
    dtype = complex if np.iscomplexobj(next(iter(blocks.values()))) else float
    if "full" in methods or "sd1" in methods:
        lam_full = []
        lam_sd1 = []
        for two_m in range(-geo.m_max, geo.m_max + 1, 2):
            rows = [ja for ja in geo.ja_list if ja >= abs(two_m)]
            cols = [jb for jb in geo.jb_list if jb >= abs(two_m)]
            if not rows or not cols:
                continue
            row_off = {}
            off = 0
            for ja in rows:
                row_off[ja] = off
                off += geo.na[ja]
            n_rows = off
            col_off = {}
            off = 0
            for jb in cols:
                col_off[jb] = off
                off += geo.nb[jb]
            n_cols = off
            x = np.zeros((n_rows, n_cols), dtype=dtype)
            for ja in rows:
                for jb in geo.partners[ja]:
                    if jb < abs(two_m):
                        continue
                    c = geo.cg_coefficient(ja, jb, two_m)
                    if c == 0.0:
                        continue
                    x[
                        row_off[ja] : row_off[ja] + geo.na[ja],
                        col_off[jb] : col_off[jb] + geo.nb[jb],
                    ] = c * blocks[(ja, jb)]
            if "full" in methods:
                if n_rows <= n_cols:
                    gram = x @ x.conj().T
                else:
                    gram = x.conj().T @ x
                lam_full.append(np.clip(np.linalg.eigvalsh(gram), 0.0, None))
            if "sd1" in methods:
                for ja in rows:
                    xb = x[row_off[ja] : row_off[ja] + geo.na[ja]]
                    gram = xb @ xb.conj().T
                    lam_sd1.append(np.clip(np.linalg.eigvalsh(gram), 0.0, None))
        if "full" in methods:
            out["full"] = schmidt_square_entropy(np.concatenate(lam_full))
        if "sd1" in methods:
            out["sd1"] = schmidt_square_entropy(np.concatenate(lam_sd1))
    if "sd2" in methods:
        sub = [(ja, geo.two_j - ja) for ja in geo.ja_list if (ja, geo.two_j - ja) in geo.cg]
        if not sub:
            raise ValueError(
                f"no J_B = J - J_A pairing exists for two_j={geo.two_j}, cut={geo.cut}"
            )
        trace = sum(float(np.sum(np.abs(blocks[p]) ** 2)) for p in sub)
        lams = []
        for pair in sub:
            w = blocks[pair]
            gram = w @ w.conj().T
            mu = np.clip(np.linalg.eigvalsh(gram), 0.0, None) / trace
            weights = geo.cg[pair] ** 2
            lams.append(np.outer(weights, mu).ravel())
        out["sd2"] = schmidt_square_entropy(np.concatenate(lams))
    return out


def _sample_range(args):
    sites, two_j, cut, seed, start, stop, methods, complex_coefficients = args
    geo = coupled_geometry(sites, two_j, cut)
    out = {m: np.empty(stop - start) for m in methods}
    for i in range(start, stop):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, i)))
        blocks = _draw_blocks(rng, geo, complex_coefficients)
        values = _entropies_from_blocks(geo, blocks, methods)
        for m in methods:
            out[m][i - start] = values[m]
    return out


def resolve_workers(n_items):
    """Worker count for embarrassingly parallel loops.

    Controlled by the environment variable SPINSECTORS_WORKERS; when unset,
    small workloads run serially and large ones use up to four processes.
    Results are independent of the worker count by construction.
    """
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        workers = int(env)
        if workers < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {env}")
    elif n_items < 256:
        workers = 1
    else:
        workers = min(4, os.cpu_count() or 1)
    return max(1, min(workers, n_items))


def ensemble_entropy_samples(
    sites, two_j, cut, samples, seed, methods=("full",), complex_coefficients=False, workers=None
):
    """Per-sample entanglement entropies of the requested sector ensembles.

    All requested methods are evaluated on the same Gaussian draws, so
    cross-method differences are paired.  Sample i is generated from the seed
    sequence (seed, i), making the output independent of `workers` and of any
    parallel schedule.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    methods = tuple(methods)
    if workers is None:
        workers = resolve_workers(samples)
    bounds = np.linspace(0, samples, workers + 1).astype(int)
    jobs = [
        (sites, two_j, cut, seed, int(a), int(b), methods, complex_coefficients)
        for a, b in zip(bounds[:-1], bounds[1:])
        if b > a
    ]
    if len(jobs) == 1:
        parts = [_sample_range(jobs[0])]
    else:
        from concurrent.futures import ProcessPoolExecutor

        try:
            with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
                parts = list(pool.map(_sample_range, jobs))
        except OSError:
            parts = [_sample_range(job) for job in jobs]
    out = {m: np.concatenate([p[m] for p in parts]) for m in methods}
    bound = min(cut, sites - cut) * math.log(2.0) + 1e-9
    for values in out.values():
        if values.min() < 0.0 or values.max() > bound:
            raise RuntimeError("sampled entropy violates the min(L_A, L_B) ln 2 bound")
    return out


@dataclass(frozen=True)
class EntropyEstimate:
    """Monte Carlo entropy statistics with seed provenance."""

    mean: float
    std_dev: float
    sem: float
    samples: int
    method: str
    seed: int

    @classmethod
    def from_samples(cls, values, method, seed):
        values = np.asarray(values)
        n = values.size
        std = float(values.std(ddof=1)) if n > 1 else 0.0
        return cls(float(values.mean()), std, std / math.sqrt(n), n, method, seed)


@dataclass(frozen=True)
class BipartitionSpec:
    """A contiguous cut of an L-site chain."""

    sites: int
    cut: int

    def __post_init__(self):
        if not 1 <= self.cut < self.sites:
            raise ValueError(f"cut must satisfy 1 <= cut < {self.sites}, got {self.cut}")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.cut, self.sites)


@dataclass(frozen=True)
class RandomStateSpec:
    """Ensemble of Gaussian random states in one (J, J_z) sector."""

    sector: SectorLabel
    samples: int
    seed: int
    coefficient_field: str = "real"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.coefficient_field not in ("real", "complex"):
            raise ValueError(f"coefficient_field must be 'real' or 'complex'")


def _mc_average(sites, two_j, cut, samples, seed, method, complex_coefficients, workers):
    values = ensemble_entropy_samples(
        sites, two_j, cut, samples, seed, (method,), complex_coefficients, workers
    )[method]
    return EntropyEstimate.from_samples(values, method, seed)


def random_state_average(sites, two_j, cut, samples, seed, complex_coefficients=False, workers=None):
    """Average entropy of Gaussian random states of the full (J, J_z=0) sector."""
    return _mc_average(sites, two_j, cut, samples, seed, "full", complex_coefficients, workers)


def sd1_average(sites, two_j, cut, samples, seed, complex_coefficients=False, workers=None):
    """Sector average with interference between different J_A dropped."""
    return _mc_average(sites, two_j, cut, samples, seed, "sd1", complex_coefficients, workers)


def sd2_average(sites, two_j, cut, samples, seed, complex_coefficients=False, workers=None):
    """Sector average restricted to the dominant J_B = J - J_A pairings."""
    return _mc_average(sites, two_j, cut, samples, seed, "sd2", complex_coefficients, workers)


def ensemble_average(spec: RandomStateSpec, cut, method="full", workers=None):
    """Dispatch a RandomStateSpec to the requested sampling method."""
    if spec.sector.species != HALF:
        raise ValueError("random-state ensembles are implemented for spin-1/2 only")
    if spec.sector.two_jz != 0:
        raise ValueError("random-state ensembles are implemented for the J_z=0 sector")
    return _mc_average(
        spec.sector.sites,
        spec.sector.two_j,
        cut,
        spec.samples,
        spec.seed,
        method,
        spec.coefficient_field == "complex",
        workers,
    )


def default_sample_count(method, sites):
    """Sample counts used for production sweeps: 1000 at small L, 100 beyond."""
    if method == "full":
        return 1000 if sites <= 20 else 100
    return 1000 if sites <= 30 else 100


# ---------------------------------------------------------------------------
# block-diagonal closed forms


def sd2_average_closed(sites, two_j, cut):
    """Closed-form sd2 average: Page terms plus Clebsch-Gordan weight entropy.

    Sum over J_A of (d_JA/d) [S_CG(J_A) + S_Page(n_A, n_B) + psi(d+1) -
    psi(d_JA+1)] with d_JA = n_A(J_A) n_B(J-J_A); the weight entropy is
    computed from explicit squared CG columns, not the J=0 shortcut.
    """
    geo = coupled_geometry(sites, two_j, cut)
    terms = []
    for two_ja in geo.ja_list:
        two_jb = two_j - two_ja
        if (two_ja, two_jb) not in geo.cg:
            continue
        na = geo.na[two_ja]
        nb = geo.nb[two_jb]
        weights = geo.cg[(two_ja, two_jb)] ** 2
        s_cg = entropy_nats(weights)
        terms.append((na * nb, s_cg + page_average(na, nb)))
    if not terms:
        raise ValueError(
            f"no J_B = J - J_A pairing exists for L={sites}, two_j={two_j}, cut={cut}"
        )
    d = sum(d_ja for d_ja, _ in terms)
    psi_d = digamma(d + 1)
    return sum(
        (d_ja / d) * (inner + psi_d - digamma(d_ja + 1)) for d_ja, inner in terms
    )


def sd1_semianalytic(sites, two_j, cut):
    """Block-decomposition estimate of the sd1 average.

    Treats each J_A block as a Page problem of size n_A x (sum of partner
    n_B), with the subsystem-magnetization weights mixed over partners.  Exact
    at J=0, where it reduces to the singlet sum; an O(1) overestimate
    otherwise at f=1/2.
    """
    geo = coupled_geometry(sites, two_j, cut)
    d = geo.sector_dim
    psi_d = digamma(d + 1)
    total = 0.0
    for two_ja in geo.ja_list:
        na = geo.na[two_ja]
        partners = geo.partners[two_ja]
        nb_eff = sum(geo.nb[jb] for jb in partners)
        p_m = np.zeros(two_ja + 1)
        for two_jb in partners:
            share = geo.nb[two_jb] / nb_eff
            for k, two_m in enumerate(range(-two_ja, two_ja + 1, 2)):
                p_m[k] += share * geo.cg_coefficient(two_ja, two_jb, two_m) ** 2
        d_ja = na * nb_eff
        total += (d_ja / d) * (
            entropy_nats(p_m) + page_average(na, nb_eff) + psi_d - digamma(d_ja + 1)
        )
    return total


def paired_spin_crossover(fraction, j):
    """Subsystem spin density where the two block multiplicities cross.

    Solves f*rate(x/f) = (1-f)*rate((j-x)/(1-f)) for x on the asymptotic rate
    functions (f taken <= 1/2 by mirror symmetry).  Returns None when the two
    sides never cross in the admissible interval; at f = 1/2 the crossover
    sits exactly at the Gaussian center x = j/2.
    """
    f = Fraction(fraction)
    if not 0 < f < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    f = min(f, 1 - f)
    if not 0.0 < j <= 1.0:
        raise ValueError(f"spin density must lie in (0, 1], got {j}")
    if f == Fraction(1, 2):
        return j / 2.0
    ff = float(f)

    def gap(x):
        return ff * multiplicity_rate(HALF, x / ff) - (1.0 - ff) * multiplicity_rate(
            HALF, (j - x) / (1.0 - ff)
        )

    lo = max(0.0, j - (1.0 - ff)) + 1e-12
    hi = j * ff
    if gap(lo) <= 0.0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def sd2_asymptotic(sites, fraction, j):
    """Leading large-L terms of the sd2 average at spin density j = 2J/L.

    Volume term rate(j) f L, a sqrt(L) correction present only at f = 1/2,
    the ln L term of the maximal-spin state, and an O(1) remainder; at j = 1
    everything except the maximal-spin terms vanishes.
    """
    f = Fraction(fraction)
    if not 0 < f < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if not 0.0 < j <= 1.0:
        raise ValueError(f"spin density must lie in (0, 1], got {j}")
    f = min(f, 1 - f)
    ff = float(f)
    if j == 1.0:
        return max_spin_entropy_asymptotic(sites, f)
    value = multiplicity_rate(HALF, j) * ff * sites
    if f == Fraction(1, 2):
        value += (
            math.sqrt(1.0 - j * j)
            * math.log((1.0 - j) / (1.0 + j))
            / (2.0 * math.sqrt(2.0 * math.pi))
        ) * math.sqrt(sites)
    value += max_spin_entropy_asymptotic(sites, f)
    value += math.log(2.0 * j**1.5 / math.sqrt(1.0 - j * j))
    value -= (1.0 - 2.0 * ff * (1.0 - j)) / (2.0 * j) * math.log((1.0 + j) / (1.0 - j))
    value += (ff + math.log(1.0 - ff)) / 2.0
    return value
