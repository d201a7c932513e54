"""
Oracle Module for gqm
Brute-force element enumeration used to cross-check every exact carrier operation
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from carriers_finite import (SubgroupJoinCarrier, SubgroupMeetCarrier, SubspaceJoinCarrier, SubspaceMeetCarrier,
                             endo_image, endo_preimage, enumerate_endomorphisms, enumerate_linmaps,
                             enumerate_subgroups, enumerate_subspaces, linmap_image, linmap_preimage, LinMap, _freeze)
from carriers_windowed import (_blocks_of, _cylinder, banded_image, causal_preimage, open_dist, open_meet,
                               window_dist, window_join)
from core import DEFAULT_ELEMENT_BUDGET, BudgetError, ExtDist, log
from dynamics import Flow, entropy_at, trajectory_prefix, validate_flow

ORACLE_LIMIT = 2 ** 16
EXHAUSTIVE_MAP_LIMIT = 256


@dataclass
class OracleReport:
    """Counts of compared values and every disagreement found"""
    target: str
    checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches

    def compare(self, kind, computed, expected, detail):
        self.checked += 1
        if computed != expected:
            self.mismatches.append({'kind': kind, 'detail': detail,
                                    'computed': str(computed), 'expected': str(expected)})

    def to_json(self):
        return {'target': self.target, 'ok': self.ok, 'checked': self.checked, 'mismatches': self.mismatches}


def span(moduli, generators):
    """All Z-combinations of the generators in the product of Z/m_i"""
    mods = tuple(moduli)
    zero = tuple(0 for _ in mods)
    found = {zero}
    frontier = [zero]
    gens = [tuple(int(v) % m for v, m in zip(g, mods)) for g in generators]
    while frontier:
        following = []
        for a in frontier:
            for g in gens:
                s = tuple((x + y) % m for x, y, m in zip(a, g, mods))
                if s not in found:
                    found.add(s)
                    following.append(s)
                    if len(found) > ORACLE_LIMIT:
                        raise BudgetError(f"span exceeds {ORACLE_LIMIT} elements")
        frontier = following
    return frozenset(found)


def subgroup_elements(H):
    return span(H.moduli, H.generators().T.tolist())


def subspace_elements(H):
    rows = H.rows()
    if H.dim == 0:
        return frozenset({tuple(0 for _ in range(H.n))})
    return frozenset(tuple(int(v) for v in (np.array(c, dtype=np.int64) @ rows) % H.p)
                     for c in itertools.product(range(H.p), repeat=H.dim))


def set_sum(A, B, moduli):
    return frozenset(tuple((x + y) % m for x, y, m in zip(a, b, moduli)) for a in A for b in B)


def _log_index(big, small):
    return ExtDist.log(len(big) // len(small))


def _dim_index(big, small, p):
    return ExtDist.dim(round(math.log(len(big) // len(small), p)))


def is_subgroup(elements, moduli):
    zero = tuple(0 for _ in moduli)
    return zero in elements and all(s in elements for s in set_sum(elements, elements, moduli))


def diff_finite_group(G, endos=None, budget=DEFAULT_ELEMENT_BUDGET, steps=8):
    """
    Every join, meet, index, image, preimage and entropy value on a finite abelian
    group against element enumeration
    """
    report = OracleReport(f"subgroups{list(G.moduli)}")
    subs = enumerate_subgroups(G, budget)
    sets = {H: subgroup_elements(H) for H in subs}
    report.compare('distinct_subgroups', len(set(sets.values())), len(subs), 'canonical forms are unique')
    if G.order <= 12:
        elements = list(G.elements())
        brute = [frozenset(c) for r in range(1, len(elements) + 1)
                 for c in itertools.combinations(elements, r) if is_subgroup(frozenset(c), G.moduli)]
        report.compare('subgroup_count', len(subs), len(brute), 'enumeration against all closed subsets')
    vee, wedge = SubgroupJoinCarrier(G), SubgroupMeetCarrier(G)
    for H, K in itertools.product(subs, repeat=2):
        A, B = sets[H], sets[K]
        total, common = set_sum(A, B, G.moduli), A & B
        detail = f"H={H.matrix} K={K.matrix}"
        report.compare('join', sets[vee.join(H, K)], total, detail)
        report.compare('meet', sets[wedge.join(H, K)], common, detail)
        report.compare('dist_vee', vee.dist(H, K), _log_index(total, A), detail)
        report.compare('dist_wedge', wedge.dist(H, K), _log_index(A, common), detail)
        report.compare('order', H.order, len(A), detail)
    if endos is None:
        endos = enumerate_endomorphisms(G, budget)
    for f in endos:
        image_flow = validate_flow(Flow(vee, lambda H, f=f: endo_image(f, H), 'image'))
        for H in subs:
            A = sets[H]
            detail = f"f={f.matrix} H={H.matrix}"
            report.compare('image', sets[endo_image(f, H)], frozenset(f.apply(a) for a in A), detail)
            report.compare('preimage', sets[endo_preimage(f, H)],
                           frozenset(g for g in G.elements() if f.apply(g) in A), detail)
            traj = trajectory_prefix(image_flow, H, steps)
            acc = frozenset(A)
            power = frozenset(A)
            for j in range(1, steps + 1):
                report.compare('trajectory', sets[traj[j]], acc, f"{detail} n={j}")
                power = frozenset(f.apply(a) for a in power)
                acc = set_sum(acc, power, G.moduli)
            report.compare('entropy', entropy_at(image_flow, H).value.is_zero, True, detail)
    log('ORACLE', f"{report.target}: {report.checked} values, {len(report.mismatches)} mismatches")
    return report


def diff_subspaces(V, maps=None, sample_maps=16, seed=0, steps=6):
    """
    Subspace joins, meets, dimensions, images and preimages against enumeration

    Without explicit maps every linear map is checked when there are at most
    EXHAUSTIVE_MAP_LIMIT of them; otherwise sample_maps random maps are drawn.
    """
    report = OracleReport(f"subspaces(GF({V.p})^{V.n})")
    subs = enumerate_subspaces(V)
    sets = {H: subspace_elements(H) for H in subs}
    report.compare('distinct_subspaces', len(set(sets.values())), len(subs), 'canonical forms are unique')
    vee, wedge = SubspaceJoinCarrier(V), SubspaceMeetCarrier(V)
    mods = (V.p,) * V.n
    for H, K in itertools.product(subs, repeat=2):
        A, B = sets[H], sets[K]
        total, common = set_sum(A, B, mods), A & B
        detail = f"H={H.basis} K={K.basis}"
        report.compare('join', sets[vee.join(H, K)], total, detail)
        report.compare('meet', sets[wedge.join(H, K)], common, detail)
        report.compare('dist_vee_dim', vee.dist(H, K), _dim_index(total, A, V.p), detail)
        report.compare('dist_wedge_dim', wedge.dist(H, K), _dim_index(A, common, V.p), detail)
    if maps is None and V.p ** (V.n * V.n) <= EXHAUSTIVE_MAP_LIMIT:
        maps = enumerate_linmaps(V, EXHAUSTIVE_MAP_LIMIT)
    else:
        rng = np.random.default_rng(seed)
        maps = list(maps or [])
        maps += [LinMap(V, _freeze(rng.integers(0, V.p, size=(V.n, V.n)))) for _ in range(sample_maps)]
    for f in maps:
        image_flow = validate_flow(Flow(vee, lambda H, f=f: linmap_image(f, H), 'image'))
        for H in subs:
            A = sets[H]
            detail = f"f={f.matrix} H={H.basis}"
            report.compare('image', sets[linmap_image(f, H)], frozenset(f.apply(a) for a in A), detail)
            report.compare('preimage', sets[linmap_preimage(f, H)],
                           frozenset(v for v in V.vectors() if f.apply(v) in A), detail)
            report.compare('entropy', entropy_at(image_flow, H).value.is_zero, True, detail)
            traj = trajectory_prefix(image_flow, H, steps)
            report.compare('stationary', traj[-1] == traj[-2], True, detail)
    log('ORACLE', f"{report.target}: {report.checked} values, {len(report.mismatches)} mismatches")
    return report


def _window_set(x, start, stop):
    blocks = _blocks_of(x)
    width = stop - start
    cols = np.zeros((width, 0), dtype=np.int64)
    if x.width:
        raw = blocks.columns(x.body)
        cols = np.zeros((width, raw.shape[1]), dtype=np.int64)
        cols[x.offset - start:x.stop - start] = raw
    return span((x.modulus,) * width, cols.T.tolist())


def diff_direct_sum(carrier, elements, endo=None):
    """Window joins, distances and banded images against enumeration inside small blocks"""
    report = OracleReport(carrier.name)
    m = carrier.modulus
    elements = list(dict.fromkeys(carrier.canonical(e) for e in elements))
    for x, y in itertools.product(elements, repeat=2):
        live = [e for e in (x, y) if e.width]
        if not live:
            continue
        start, stop = min(e.offset for e in live), max(e.stop for e in live)
        if m ** (stop - start) > ORACLE_LIMIT:
            continue
        A, B = _window_set(x, start, stop), _window_set(y, start, stop)
        total = set_sum(A, B, (m,) * (stop - start))
        detail = f"x={carrier.to_json(x)} y={carrier.to_json(y)}"
        report.compare('window_join', _window_set(window_join(x, y), start, stop), total, detail)
        expected = _log_index(total, A) if not carrier.field else _dim_index(total, A, m)
        report.compare('window_dist', window_dist(x, y), expected, detail)
    if endo is not None and endo.coeffs:
        for x in elements:
            if not x.width:
                continue
            start, stop = x.offset + endo.start, x.stop + endo.reach
            if m ** max(stop - start, x.width) > ORACLE_LIMIT:
                continue
            images = set()
            for v in _window_set(x, x.offset, x.stop):
                out = [0] * (stop - start)
                for i, vi in enumerate(v):
                    for t, c in enumerate(endo.coeffs):
                        out[i + t] = (out[i + t] + vi * c) % m
                images.add(tuple(out))
            report.compare('banded_image', _window_set(banded_image(endo, x), start, stop), frozenset(images),
                           f"x={carrier.to_json(x)}")
    log('ORACLE', f"{report.target}: {report.checked} values, {len(report.mismatches)} mismatches")
    return report


def _open_set(U, depth):
    body = _cylinder(U, depth)
    cols = _blocks_of(U).columns(body)
    return span((U.modulus,) * depth, cols.T.tolist())


def diff_profinite(carrier, elements, endo=None):
    """Open meets, indices and causal preimages against enumeration at a common depth"""
    report = OracleReport(carrier.name)
    m = carrier.modulus
    elements = list(dict.fromkeys(carrier.canonical(e) for e in elements))
    for U, V in itertools.product(elements, repeat=2):
        depth = max(U.depth, V.depth)
        if m ** depth > ORACLE_LIMIT:
            continue
        A, B = _open_set(U, depth), _open_set(V, depth)
        detail = f"U={carrier.to_json(U)} V={carrier.to_json(V)}"
        report.compare('open_meet', _open_set(open_meet(U, V), depth), A & B, detail)
        expected = _log_index(A, A & B) if not carrier.field else _dim_index(A, A & B, m)
        report.compare('open_dist', open_dist(U, V), expected, detail)
    if endo is not None:
        for U in elements:
            depth = U.depth + endo.reach
            if m ** depth > ORACLE_LIMIT:
                continue
            A = _open_set(U, U.depth)
            expected = frozenset(v for v in itertools.product(range(m), repeat=depth)
                                 if tuple(int(c) for c in endo.apply(v)[:U.depth]) in A)
            pre = causal_preimage(endo, U)
            report.compare('causal_preimage', _open_set(pre, depth), expected, f"U={carrier.to_json(U)}")
    log('ORACLE', f"{report.target}: {report.checked} values, {len(report.mismatches)} mismatches")
    return report
