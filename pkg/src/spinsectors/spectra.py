"""Exact diagonalization of SU(2)-symmetric chains in momentum-resolved sectors.

Spin-1/2 chains carry nearest plus next-nearest Heisenberg exchange with
relative strength `coupling` (integrable at 0); spin-1 chains carry nearest
Heisenberg exchange plus a biquadratic term of strength `coupling`
(integrable at 1).  Both are diagonalized in the zero-magnetization sector,
block by block in the total quasimomentum k_n = 2 pi n / L, and every
eigenstate gets its total spin resolved from the J**2 expectation value.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .combinatorics import SpinSpecies
from .ensembles import EntropyEstimate, bipartition_maps, slice_entanglement_entropy

__all__ = [
    "ChainSpec",
    "MomentumBlock",
    "EigenstateRecord",
    "ChaosReport",
    "MAX_SITES",
    "configuration_space",
    "hamiltonian_matrix",
    "spin_squared_matrix",
    "momentum_blocks",
    "diagonalize_and_resolve",
    "eigenstate_entropy_average",
    "gaussianity_average",
    "gaussianity_of_vector",
    "chaos_scan",
]

# Dense-solver guardrails: momentum blocks stay below ~10**4 states.
MAX_SITES = {1: 16, 2: 10}

DEGENERACY_TOL = 1e-10
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ChainSpec:
    """Periodic SU(2)-symmetric chain with one tunable coupling."""

    species: SpinSpecies
    sites: int
    coupling: float = 0.0

    def __post_init__(self):
        if self.sites < 3:
            raise ValueError(f"chains need at least 3 sites, got {self.sites}")
        if not math.isfinite(self.coupling):
            raise ValueError(f"coupling must be finite, got {self.coupling}")
        if self.species.two_s == 1 and self.sites % 2:
            raise ValueError("the spin-1/2 J_z=0 sector needs an even number of sites")


def _check_cap(spec):
    cap = MAX_SITES[spec.species.two_s]
    if spec.sites > cap:
        raise ValueError(
            f"L={spec.sites} exceeds the dense-diagonalization cap L<={cap} "
            f"for spin {spec.species.name}"
        )


# ---------------------------------------------------------------------------
# configuration space and two-site terms


def _spin_matrices(two_s):
    d = two_s + 1
    m = (np.arange(d) - two_s / 2.0)  # ascending local magnetization
    sz = np.diag(m)
    sp = np.zeros((d, d))
    s = two_s / 2.0
    for k in range(d - 1):
        sp[k + 1, k] = math.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sm = sp.T
    return sz, sp, sm


@lru_cache(maxsize=None)
def _pair_terms(two_s, power):
    """Nonzero elements of (S_i . S_j)**power as {(di, dj): [(di', dj', amp)]}.

    Digits are local magnetization indices 0..2s; all matrix elements conserve
    the two-site magnetization.
    """
    sz, sp, sm = _spin_matrices(two_s)
    d = two_s + 1
    ss = np.kron(sz, sz) + 0.5 * (np.kron(sp, sm) + np.kron(sm, sp))
    op = np.linalg.matrix_power(ss, power)
    terms = {}
    for col in range(d * d):
        di, dj = divmod(col, d)
        entries = []
        for row in range(d * d):
            amp = op[row, col]
            if abs(amp) > 1e-12:
                oi, oj = divmod(row, d)
                entries.append((oi, oj, float(amp)))
        terms[(di, dj)] = tuple(entries)
    return terms


def _bond_list(spec):
    """(distance, coefficient, pair-term power) triples defining H."""
    if spec.species.two_s == 1:
        return ((1, -1.0, 1), (2, -spec.coupling, 1))
    return ((1, -1.0, 1), (1, spec.coupling, 2))


@lru_cache(maxsize=None)
def configuration_space(two_s, sites, two_jz=0):
    """Sorted integer codes and digit table of the fixed-magnetization slice.

    Site i occupies the base-d digit of weight d**i; digit values 0..2s map to
    local two_m = 2*digit - 2s.
    """
    d = two_s + 1
    codes = []

    def rec(code, weight, remaining, need):
        if remaining == 0:
            if need == 0:
                codes.append(code)
            return
        for digit in range(d):
            two_m = 2 * digit - two_s
            rest = need - two_m
            if abs(rest) <= two_s * (remaining - 1):
                rec(code + digit * weight, weight * d, remaining - 1, rest)

    rec(0, 1, sites, two_jz)
    codes = np.array(sorted(codes), dtype=np.int64)
    digits = np.empty((len(codes), sites), dtype=np.int8)
    rem = codes.copy()
    for i in range(sites):
        digits[:, i] = rem % d
        rem //= d
    return codes, digits


def _translate(code, d, sites, top_weight):
    """Shift every site's digit one position up (periodically)."""
    top = code // top_weight
    return (code - top * top_weight) * d + top


@lru_cache(maxsize=None)
def _orbit_data(two_s, sites, two_jz=0):
    """Translation orbits of the slice: representatives, periods, and lookup.

    `lookup[code] = (rep_index, shift)` with code = T**shift |rep>.
    """
    d = two_s + 1
    codes, _ = configuration_space(two_s, sites, two_jz)
    top_weight = d ** (sites - 1)
    lookup = {}
    reps = []
    periods = []
    for code in codes.tolist():
        if code in lookup:
            continue
        orbit = [code]
        t = _translate(code, d, sites, top_weight)
        while t != code:
            orbit.append(t)
            t = _translate(t, d, sites, top_weight)
        for shift, member in enumerate(orbit):
            lookup[member] = (len(reps), shift)
        reps.append(code)
        periods.append(len(orbit))
    return np.array(reps, dtype=np.int64), np.array(periods, dtype=np.int64), lookup


@dataclass
class MomentumBlock:
    """One total-quasimomentum block of a translation-invariant operator."""

    momentum_index: int
    sites: int
    representatives: np.ndarray
    periods: np.ndarray
    matrix: np.ndarray

    @property
    def is_complex_sector(self) -> bool:
        n, sites = self.momentum_index, self.sites
        return n not in (0, sites // 2) if sites % 2 == 0 else n != 0

    @property
    def dim(self) -> int:
        return len(self.representatives)


def _assemble_block(spec, momentum_index, bonds, diagonal_shift=0.0, two_jz=0):
    two_s = spec.species.two_s
    sites = spec.sites
    d = two_s + 1
    top_weight = d ** (sites - 1)
    reps, periods, lookup = _orbit_data(two_s, sites, two_jz)
    n = momentum_index
    in_block = (n * periods) % sites == 0
    block_reps = np.nonzero(in_block)[0]
    pos = {int(r): i for i, r in enumerate(block_reps)}
    dim = len(block_reps)
    k = 2.0 * math.pi * n / sites
    phase = np.exp(1j * k * np.arange(sites))
    matrix = np.zeros((dim, dim), dtype=complex)
    weights = d ** np.arange(sites, dtype=np.int64)
    for col, rep_idx in enumerate(block_reps):
        code = int(reps[rep_idx])
        digits = [(code // int(weights[i])) % d for i in range(sites)]
        ra = periods[rep_idx]
        if diagonal_shift:
            matrix[col, col] += diagonal_shift
        for dist, coeff, power in bonds:
            if coeff == 0.0:
                continue
            terms = _pair_terms(two_s, power)
            for i in range(sites):
                jsite = (i + dist) % sites
                for oi, oj, amp in terms[(digits[i], digits[jsite])]:
                    new_code = (
                        code
                        + (oi - digits[i]) * int(weights[i])
                        + (oj - digits[jsite]) * int(weights[jsite])
                    )
                    rep_b, shift = lookup[new_code]
                    row = pos.get(rep_b)
                    if row is None:
                        continue  # target orbit incompatible with this momentum
                    rb = periods[rep_b]
                    matrix[row, col] += (
                        coeff * amp * phase[shift] * math.sqrt(ra / rb)
                    )
    matrix = 0.5 * (matrix + matrix.conj().T)
    return MomentumBlock(n, sites, reps[block_reps], periods[block_reps], matrix)


def momentum_blocks(spec, two_jz=0):
    """All momentum blocks of the Hamiltonian on the fixed-J_z slice."""
    _check_cap(spec)
    return [
        _assemble_block(spec, n, _bond_list(spec), two_jz=two_jz)
        for n in range(spec.sites)
    ]


@lru_cache(maxsize=64)
def _j2_block_matrix(two_s, sites, momentum_index, two_jz=0):
    """One momentum block of total J**2 (coupling-independent, cached)."""
    species = SpinSpecies(two_s)
    spec = ChainSpec(species, sites, 0.0)
    s_local = (two_s / 2.0) * (two_s / 2.0 + 1.0)
    bonds = tuple((dist, 1.0, 1) for dist in range(1, sites))
    return _assemble_block(
        spec, momentum_index, bonds, diagonal_shift=sites * s_local, two_jz=two_jz
    ).matrix


def hamiltonian_matrix(spec, two_jz=0):
    """Dense Hamiltonian on the fixed-J_z configuration space (no symmetry).

    Reference implementation used to certify the momentum decomposition.
    """
    _check_cap(spec)
    two_s = spec.species.two_s
    d = two_s + 1
    codes, digits = configuration_space(two_s, spec.sites, two_jz)
    index = {int(c): i for i, c in enumerate(codes)}
    weights = d ** np.arange(spec.sites, dtype=np.int64)
    dim = len(codes)
    matrix = np.zeros((dim, dim))
    for col in range(dim):
        code = int(codes[col])
        row_digits = digits[col]
        for dist, coeff, power in _bond_list(spec):
            if coeff == 0.0:
                continue
            terms = _pair_terms(two_s, power)
            for i in range(spec.sites):
                jsite = (i + dist) % spec.sites
                di, dj = int(row_digits[i]), int(row_digits[jsite])
                for oi, oj, amp in terms[(di, dj)]:
                    new_code = code + (oi - di) * int(weights[i]) + (oj - dj) * int(weights[jsite])
                    matrix[index[new_code], col] += coeff * amp
    return matrix


def spin_squared_matrix(species, sites, two_jz=0):
    """Dense total J**2 on the fixed-J_z configuration space."""
    spec = ChainSpec(species, sites, 0.0)
    _check_cap(spec)
    two_s = species.two_s
    d = two_s + 1
    codes, digits = configuration_space(two_s, sites, two_jz)
    index = {int(c): i for i, c in enumerate(codes)}
    weights = d ** np.arange(sites, dtype=np.int64)
    dim = len(codes)
    s_local = (two_s / 2.0) * (two_s / 2.0 + 1.0)
    matrix = np.eye(dim) * sites * s_local
    terms = _pair_terms(two_s, 1)
    for col in range(dim):
        code = int(codes[col])
        row_digits = digits[col]
        for dist in range(1, sites):
            for i in range(sites):
                jsite = (i + dist) % sites
                di, dj = int(row_digits[i]), int(row_digits[jsite])
                for oi, oj, amp in terms[(di, dj)]:
                    new_code = code + (oi - di) * int(weights[i]) + (oj - dj) * int(weights[jsite])
                    matrix[index[new_code], col] += amp
    return matrix


# ---------------------------------------------------------------------------
# diagonalization, spin resolution, eigenstate statistics


@dataclass
class EigenstateRecord:
    """One resolved eigenstate of a momentum block."""

    energy: float
    momentum_index: int
    two_j: int
    j2_residual: float
    central: bool
    complex_sector: bool
    gaussianity: float
    entropies: dict = field(default_factory=dict)
    flagged: bool = False


def gaussianity_of_vector(vector):
    """Moment ratio mean(x**2) / mean(|x|)**2 of the real parts of a vector."""
    x = np.real(np.asarray(vector))
    mean_abs = np.abs(x).mean()
    if mean_abs == 0.0:
        raise ValueError("vector has identically vanishing real part")
    return float((x**2).mean() / mean_abs**2)


def _config_amplitudes(block, vector, lookup_size, code_to_slice, two_s, sites):
    """Map a momentum-block eigenvector back to slice-configuration amplitudes."""
    d = two_s + 1
    top_weight = d ** (sites - 1)
    k = 2.0 * math.pi * block.momentum_index / sites
    amps = np.zeros(lookup_size, dtype=complex)
    for idx in range(block.dim):
        code = int(block.representatives[idx])
        period = int(block.periods[idx])
        coeff = vector[idx] / math.sqrt(period)
        member = code
        for shift in range(period):
            amps[code_to_slice[member]] = coeff * np.exp(-1j * k * shift)
            member = _translate(member, d, sites, top_weight)
    return amps


def _central_window(dim, central_fraction):
    n_sel = max(1, round(central_fraction * dim))
    start = (dim - n_sel) // 2
    return start, start + n_sel


def diagonalize_and_resolve(
    spec,
    fractions=(Fraction(1, 2),),
    central_fraction=0.2,
    two_jz=0,
    momentum_indices=None,
    compute_entropies=True,
    pooled_central=False,
):
    """Diagonalize every momentum block and resolve total spin per eigenstate.

    Within numerically degenerate energy clusters the projected J**2 is
    re-diagonalized so every returned eigenstate carries a sharp spin label;
    records whose residual still exceeds the tolerance are flagged and
    excluded from averages.  Entanglement entropies (contiguous cut of
    round(f*L) sites) and Gaussianity are evaluated for the central
    `central_fraction` of each block by energy rank; `pooled_central` ranks
    over the pooled complex-sector spectrum instead of block by block.
    """
    _check_cap(spec)
    two_s = spec.species.two_s
    sites = spec.sites
    codes, digits = configuration_space(two_s, sites, two_jz)
    code_to_slice = {int(c): i for i, c in enumerate(codes)}
    cut_maps = {}
    if compute_entropies:
        for f in fractions:
            cut = round(Fraction(f) * sites)
            if not 0 < cut < sites:
                raise ValueError(f"fraction {f} gives an empty bipartition at L={sites}")
            cut_maps[Fraction(f)] = (cut, bipartition_maps(digits, range(cut)))
    # Conjugate momentum pairs (n, L-n) carry identical spectra and entropy
    # statistics, so only n = 0 .. L/2 is diagonalized by default.
    indices = range(sites // 2 + 1) if momentum_indices is None else momentum_indices
    solved = []
    for n in indices:
        block = _assemble_block(spec, n, _bond_list(spec), two_jz=two_jz)
        energies, vectors = np.linalg.eigh(block.matrix)
        j2 = _j2_block_matrix(two_s, sites, n, two_jz)
        # re-diagonalize J**2 inside degenerate clusters for sharp labels
        clusters = []
        start = 0
        scale = max(1.0, float(np.max(np.abs(energies))) if len(energies) else 1.0)
        for i in range(1, block.dim + 1):
            if i == block.dim or energies[i] - energies[i - 1] > DEGENERACY_TOL * scale:
                clusters.append((start, i))
                start = i
        for lo, hi in clusters:
            if hi - lo == 1:
                continue
            sub = vectors[:, lo:hi]
            proj = sub.conj().T @ j2 @ sub
            _, rot = np.linalg.eigh(0.5 * (proj + proj.conj().T))
            vectors[:, lo:hi] = sub @ rot
        q_values = np.real(np.einsum("ij,jk,ki->i", vectors.conj().T, j2, vectors))
        solved.append((block, energies, vectors, q_values))

    central = {}
    if pooled_central:
        pooled = sorted(
            (float(energies[i]), block.momentum_index, i)
            for block, energies, _, _ in solved
            if block.is_complex_sector
            for i in range(block.dim)
        )
        lo_sel, hi_sel = _central_window(len(pooled), central_fraction)
        chosen = {(n, i) for _, n, i in pooled[lo_sel:hi_sel]}
        for block, _, _, _ in solved:
            central[block.momentum_index] = {
                i for i in range(block.dim) if (block.momentum_index, i) in chosen
            }
    else:
        for block, _, _, _ in solved:
            lo_sel, hi_sel = _central_window(block.dim, central_fraction)
            central[block.momentum_index] = set(range(lo_sel, hi_sel))

    records = []
    for block, energies, vectors, q_values in solved:
        for i in range(block.dim):
            q = max(float(q_values[i]), 0.0)
            two_j = round(math.sqrt(4.0 * q + 1.0) - 1.0)
            if (two_j - two_s * sites) % 2:
                two_j += 1 if (math.sqrt(4.0 * q + 1.0) - 1.0) > two_j else -1
            residual = abs(q - (two_j / 2.0) * (two_j / 2.0 + 1.0))
            rec = EigenstateRecord(
                energy=float(energies[i]),
                momentum_index=block.momentum_index,
                two_j=two_j,
                j2_residual=residual,
                central=i in central[block.momentum_index],
                complex_sector=block.is_complex_sector,
                gaussianity=math.nan,
                flagged=residual > RESIDUAL_TOL,
            )
            if rec.central and not rec.flagged:
                rec.gaussianity = gaussianity_of_vector(vectors[:, i])
                if compute_entropies:
                    amps = _config_amplitudes(
                        block, vectors[:, i], len(codes), code_to_slice, two_s, sites
                    )
                    for f, (cut, maps) in cut_maps.items():
                        rec.entropies[f] = slice_entanglement_entropy(
                            amps, digits, range(cut), maps=maps
                        )
            records.append(rec)
    return records


def _select(records, two_j, complex_only=True):
    return [
        r
        for r in records
        if r.central
        and not r.flagged
        and r.two_j == two_j
        and (r.complex_sector or not complex_only)
    ]


def eigenstate_entropy_average(records, two_j, fraction=Fraction(1, 2)):
    """Mean entropy over central complex-sector eigenstates with spin two_j/2."""
    f = Fraction(fraction)
    chosen = [r.entropies[f] for r in _select(records, two_j) if f in r.entropies]
    if not chosen:
        raise ValueError(f"no central eigenstates with two_j={two_j} were found")
    values = np.array(chosen)
    n = len(values)
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    return EntropyEstimate(float(values.mean()), std, std / math.sqrt(n), n, "ed", 0)


def gaussianity_average(records, two_j):
    """Mean Gaussianity over central complex-sector eigenstates with spin two_j/2."""
    chosen = [r.gaussianity for r in _select(records, two_j) if not math.isnan(r.gaussianity)]
    if not chosen:
        raise ValueError(f"no central eigenstates with two_j={two_j} were found")
    return float(np.mean(chosen))


@dataclass(frozen=True)
class ChaosReport:
    """Chaos indicators of one (coupling, J) slice of the spectrum."""

    coupling: float
    two_j: int
    gaussianity: float
    mean_entropy: float
    std_dev: float
    eigenstates: int


def chaos_scan(species, sites, couplings, two_j_list, fraction=Fraction(1, 2)):
    """Gaussianity and mean entropy per (coupling, J) over the coupling grid."""
    if not couplings:
        raise ValueError("the coupling grid must not be empty")
    if species.two_s == 1 and sites > 14:
        raise ValueError(f"coupling scans are capped at L=14 for spin-1/2, got L={sites}")
    reports = []
    for coupling in couplings:
        spec = ChainSpec(species, sites, coupling)
        records = diagonalize_and_resolve(spec, fractions=(fraction,))
        for two_j in two_j_list:
            est = eigenstate_entropy_average(records, two_j, fraction)
            gamma = gaussianity_average(records, two_j)
            reports.append(
                ChaosReport(coupling, two_j, gamma, est.mean, est.std_dev, est.samples)
            )
    return reports
