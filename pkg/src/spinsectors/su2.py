"""Clebsch-Gordan coupling and explicit sector bases over product states.

All angular momenta enter as doubled integers.  Basis vectors live on the
magnetization-resolved slice of the product space: a configuration is the
tuple of local two_m values, and only configurations compatible with the
requested total J_z are ever stored.
"""

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import SectorLabel, sector_dimensions
from .special import log_binomial

__all__ = [
    "clebsch_gordan",
    "stretched_weight",
    "stretched_weight_log",
    "SectorBasis",
    "sector_basis",
    "coupled_sector_basis",
    "apply_total_spin_squared",
    "apply_total_sz",
]

_SLICE_CAP = 1_000_000


def _lnfact(n):
    return math.lgamma(n + 1.0)


def _check_momentum(two_j, two_m, what):
    if two_j < 0:
        raise ValueError(f"{what}: negative angular momentum two_j={two_j}")
    if (two_j - two_m) % 2:
        raise ValueError(f"{what}: two_m={two_m} incompatible with two_j={two_j}")


def clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m):
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley).

    Selection-rule violations return exactly 0.0; integrality violations
    raise.  Evaluated from the Racah sum with log-factorials, so single-term
    cases (stretched couplings) remain accurate for j of order 10**3.
    """
    _check_momentum(two_j1, two_m1, "j1")
    _check_momentum(two_j2, two_m2, "j2")
    _check_momentum(two_j, two_m, "J")
    if abs(two_m1) > two_j1 or abs(two_m2) > two_j2 or abs(two_m) > two_j:
        return 0.0
    if two_m1 + two_m2 != two_m:
        return 0.0
    if not abs(two_j1 - two_j2) <= two_j <= two_j1 + two_j2:
        return 0.0
    if (two_j1 + two_j2 - two_j) % 2:
        return 0.0

    a = (two_j1 + two_j2 - two_j) // 2
    b = (two_j1 - two_j2 + two_j) // 2
    c = (-two_j1 + two_j2 + two_j) // 2
    log_pref = 0.5 * (
        math.log(two_j + 1.0)
        + _lnfact(a) + _lnfact(b) + _lnfact(c) - _lnfact(a + b + c + 1)
        + _lnfact((two_j + two_m) // 2) + _lnfact((two_j - two_m) // 2)
        + _lnfact((two_j1 - two_m1) // 2) + _lnfact((two_j1 + two_m1) // 2)
        + _lnfact((two_j2 - two_m2) // 2) + _lnfact((two_j2 + two_m2) // 2)
    )

    k_min = max(0, (two_j2 - two_j - two_m1) // 2, (two_j1 - two_j + two_m2) // 2)
    k_max = min(a, (two_j1 - two_m1) // 2, (two_j2 + two_m2) // 2)
    if k_min > k_max:
        return 0.0
    logs = []
    signs = []
    for k in range(k_min, k_max + 1):
        lt = -(
            _lnfact(k)
            + _lnfact(a - k)
            + _lnfact((two_j1 - two_m1) // 2 - k)
            + _lnfact((two_j2 + two_m2) // 2 - k)
            + _lnfact((two_j - two_j2 + two_m1) // 2 + k)
            + _lnfact((two_j - two_j1 - two_m2) // 2 + k)
        )
        logs.append(lt)
        signs.append(-1.0 if k % 2 else 1.0)
    top = max(logs)
    total = sum(s * math.exp(lt - top) for s, lt in zip(signs, logs))
    if total == 0.0:
        return 0.0
    return math.copysign(math.exp(log_pref + top + math.log(abs(total))), total)


def stretched_weight_log(two_ja, two_jb, two_m):
    """ln |<J_A m; J_B -m | J_A+J_B, 0>|**2, stable for large spins.

    Equals ln[ C(2J_A, J_A-m) C(2J_B, J_B+m) / C(2J_A+2J_B, J_A+J_B) ].
    """
    _check_momentum(two_ja, two_m, "J_A")
    _check_momentum(two_jb, two_m, "J_B")
    if abs(two_m) > min(two_ja, two_jb):
        return -math.inf
    return (
        log_binomial(two_ja, (two_ja - two_m) // 2)
        + log_binomial(two_jb, (two_jb + two_m) // 2)
        - log_binomial(two_ja + two_jb, (two_ja + two_jb) // 2)
    )


def stretched_weight(two_ja, two_jb, two_m):
    """|<J_A m; J_B -m | J_A+J_B, 0>|**2 for the maximal coupled spin."""
    lw = stretched_weight_log(two_ja, two_jb, two_m)
    return 0.0 if lw == -math.inf else math.exp(lw)


def _local_two_ms(species):
    return tuple(range(-species.two_s, species.two_s + 1, 2))


def _slice_configs(species, sites, two_jz):
    """All product configurations with total magnetization two_jz, lexicographic."""
    out = []

    def rec(prefix, remaining, need):
        if remaining == 0:
            if need == 0:
                out.append(prefix)
            return
        for ms in _local_two_ms(species):
            rest = need - ms
            if abs(rest) <= species.two_s * (remaining - 1):
                rec(prefix + (ms,), remaining - 1, rest)

    rec((), sites, two_jz)
    return out


def _couple_paths(species, sites, two_j_final=None, two_m_final=None):
    """Couple sites left to right, tracking every intermediate-spin path.

    Returns a list of (path, mdict) where path is the tuple of total spins
    after each site and mdict maps two_m to {config tuple: amplitude}.  Paths
    (and magnetizations, if requested) that cannot reach the target are pruned.
    """
    two_s = species.two_s
    states = [((), 0, {0: {(): 1.0}})]
    for k in range(1, sites + 1):
        remaining = sites - k
        new_states = []
        for path, jk, mdict in states:
            for jn in range(abs(jk - two_s), jk + two_s + 1, 2):
                if two_j_final is not None and not (
                    two_j_final - two_s * remaining <= jn <= two_j_final + two_s * remaining
                ):
                    continue
                ndict = {}
                for mn in range(-jn, jn + 1, 2):
                    if two_m_final is not None and abs(mn - two_m_final) > two_s * remaining:
                        continue
                    acc = {}
                    for ms in _local_two_ms(species):
                        mk = mn - ms
                        if abs(mk) > jk:
                            continue
                        sub = mdict.get(mk)
                        if not sub:
                            continue
                        cg = clebsch_gordan(jk, mk, two_s, ms, jn, mn)
                        if cg == 0.0:
                            continue
                        for cfg, amp in sub.items():
                            key = cfg + (ms,)
                            acc[key] = acc.get(key, 0.0) + amp * cg
                    if acc:
                        ndict[mn] = acc
                if ndict:
                    new_states.append((path + (jn,), jn, ndict))
        states = new_states
    return [(path, mdict) for path, _, mdict in states]


@dataclass
class SectorBasis:
    """Orthonormal basis of one (J, J_z) sector over the magnetization slice.

    ``vectors[i]`` holds the amplitudes of basis vector i on ``configs`` (one
    row per configuration, columns are sites, entries are local two_m).
    ``labels[i]`` records provenance: the intermediate-spin path for directly
    coupled bases, or (two_ja, two_jb, a, b) for bipartite coupled bases.
    """

    sector: SectorLabel
    configs: np.ndarray
    vectors: np.ndarray
    labels: tuple
    cut: int | None = None

    def __len__(self):
        return self.vectors.shape[0]


def _config_index(configs):
    return {tuple(int(x) for x in row): i for i, row in enumerate(configs)}


def _guard_slice(species, sites, two_j, two_jz):
    dims = sector_dimensions(species, sites, two_j, two_jz)
    if dims.fixed_jz > _SLICE_CAP:
        raise ValueError(
            f"magnetization slice has {dims.fixed_jz} configurations, above the "
            f"{_SLICE_CAP} construction cap"
        )
    return dims


def sector_basis(species, sites, two_j, two_jz):
    """Orthonormal (J, J_z) eigenbasis built by coupling one site at a time.

    The number of returned vectors equals the exact multiplicity n_J; an empty
    sector yields an empty basis.
    """
    label = SectorLabel(species, sites, two_j, two_jz)
    _guard_slice(species, sites, two_j, two_jz)
    configs = np.array(_slice_configs(species, sites, two_jz), dtype=np.int8)
    if configs.size == 0:
        configs = configs.reshape(0, sites)
    index = _config_index(configs)
    paths = [
        (path, mdict)
        for path, mdict in _couple_paths(species, sites, two_j, two_jz)
        if path[-1] == two_j and two_jz in mdict
    ]
    vectors = np.zeros((len(paths), len(configs)))
    labels = []
    for i, (path, mdict) in enumerate(paths):
        for cfg, amp in mdict[two_jz].items():
            vectors[i, index[cfg]] = amp
        labels.append(path)
    return SectorBasis(label, configs, vectors, tuple(labels))


def coupled_sector_basis(species, sites, cut, two_j, two_jz=0):
    """Sector basis organized by bipartite (J_A, J_B) coupling across `cut`.

    Every vector is sum_m <J_A m; J_B M-m | J M> |J_A, m>_a (x) |J_B, M-m>_b
    for one admissible (J_A, J_B) pair and one copy pair (a, b); the total
    count again equals n_J.
    """
    if not 1 <= cut < sites:
        raise ValueError(f"cut must satisfy 1 <= cut < sites, got {cut}")
    label = SectorLabel(species, sites, two_j, two_jz)
    _guard_slice(species, sites, two_j, two_jz)
    configs = np.array(_slice_configs(species, sites, two_jz), dtype=np.int8)
    index = _config_index(configs)

    def by_spin(paths):
        groups = {}
        for path, mdict in paths:
            groups.setdefault(path[-1], []).append(mdict)
        return groups

    a_groups = by_spin(_couple_paths(species, cut))
    b_groups = by_spin(_couple_paths(species, sites - cut))

    vecs = []
    labels = []
    for two_ja in sorted(a_groups):
        for two_jb in sorted(b_groups):
            if not abs(two_ja - two_jb) <= two_j <= two_ja + two_jb:
                continue
            if (two_ja + two_jb - two_j) % 2:
                continue
            for a_idx, a_m in enumerate(a_groups[two_ja]):
                for b_idx, b_m in enumerate(b_groups[two_jb]):
                    v = np.zeros(len(configs))
                    for two_m in range(-two_ja, two_ja + 1, 2):
                        two_mb = two_jz - two_m
                        if abs(two_mb) > two_jb:
                            continue
                        cg = clebsch_gordan(two_ja, two_m, two_jb, two_mb, two_j, two_jz)
                        if cg == 0.0:
                            continue
                        for cfg_a, amp_a in a_m[two_m].items():
                            for cfg_b, amp_b in b_m[two_mb].items():
                                v[index[cfg_a + cfg_b]] += cg * amp_a * amp_b
                    vecs.append(v)
                    labels.append((two_ja, two_jb, a_idx + 1, b_idx + 1))
    vectors = np.array(vecs) if vecs else np.zeros((0, len(configs)))
    return SectorBasis(label, configs, vectors, tuple(labels), cut=cut)


def _raise_coeff(two_s, two_m):
    return 0.5 * math.sqrt(two_s * (two_s + 2) - two_m * (two_m + 2))


def _lower_coeff(two_s, two_m):
    return 0.5 * math.sqrt(two_s * (two_s + 2) - two_m * (two_m - 2))


def apply_total_spin_squared(state, species, configs):
    """Matrix-free action of total J**2 on a magnetization-slice state."""
    configs = np.asarray(configs)
    if state.shape[0] != configs.shape[0]:
        raise ValueError(
            f"state length {state.shape[0]} does not match {configs.shape[0]} configurations"
        )
    sites = configs.shape[1]
    two_s = species.two_s
    index = _config_index(configs)
    ms = configs / 2.0
    s_local = (two_s / 2.0) * (two_s / 2.0 + 1.0)
    diag = sites * s_local + ms.sum(axis=1) ** 2 - (ms**2).sum(axis=1)
    out = diag * state
    for i, row in enumerate(configs):
        amp = state[i]
        if amp == 0.0:
            continue
        row = tuple(int(x) for x in row)
        for p in range(sites):
            if row[p] == two_s:
                continue
            cp = _raise_coeff(two_s, row[p])
            for q in range(sites):
                if q == p or row[q] == -two_s:
                    continue
                cq = _lower_coeff(two_s, row[q])
                new = list(row)
                new[p] += 2
                new[q] -= 2
                out[index[tuple(new)]] += amp * cp * cq
    return out


def apply_total_sz(state, species, configs):
    """Matrix-free action of total J_z on a magnetization-slice state."""
    configs = np.asarray(configs)
    return state * (configs.sum(axis=1) / 2.0)
