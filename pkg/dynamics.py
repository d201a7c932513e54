"""
Dynamics Module for gqm
Flows on quasimetric semilattices, trajectories, intrinsic entropy estimators and the
trajectory lemma checks
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from core import (DEFAULT_CACHE_SIZE, ConfigError, ExtDist, PreconditionError, Rate, ValidationError,
                  close, log)
from scheduler import JobScheduler

DEFAULT_N_MAX = 512
DEFAULT_CONFIRM_WINDOW = 8
DEFAULT_CLOSURE_DEPTH = 2
DEFAULT_CLOSURE_BUDGET = 256
DEFAULT_VALIDATION_SAMPLES = 32
DEFAULT_PAIR_LIMIT = 16
SUITE_N_MAX = 64
NESTED_LIMIT = 4     # i, m <= 4 in the nested trajectory identity
NESTED_STEPS = 8     # n <= 8

INVARIANT = 'invariant'
INERT = 'inert'
NON_INERT = 'non_inert'

STABILIZED = 'stabilized'
FEKETE_CAPPED = 'fekete_capped'

EQUALITY = 'equality'
STRICT_GAP = 'strict_gap'
VIOLATION = 'violation'
INCONCLUSIVE = 'inconclusive'


class Flow:
    """A carrier paired with a contractive semilattice endomorphism"""

    def __init__(self, carrier, endo, name='phi', root=None, power=1, evidence=None):
        """
        Args:
            carrier: GqmCarrier the map acts on
            endo: callable element -> element
            name: label used in reports
            root: for power flows, the flow this one is a power of
            power: exponent relative to root
            evidence: validation record (empty when unchecked)
        """
        self.carrier = carrier
        self.endo = endo
        self.name = name
        self.root = root
        self.power = power
        self.evidence = dict(evidence or {})
        self._apply = lru_cache(maxsize=DEFAULT_CACHE_SIZE)(endo)

    @property
    def contractivity_checked(self):
        return bool(self.evidence)

    @classmethod
    def validated(cls, carrier, endo, name='phi', samples=DEFAULT_VALIDATION_SAMPLES, seed=0):
        flow = cls(carrier, endo, name)
        validate_flow(flow, samples, seed)
        return flow

    def __call__(self, x):
        return self._apply(x)

    def iterate(self, x, k):
        for _ in range(k):
            x = self(x)
        return x

    def __repr__(self):
        return f"Flow({self.name} on {self.carrier.name})"


def validate_flow(flow, samples=DEFAULT_VALIDATION_SAMPLES, seed=0):
    """Sample-check that the map fixes bottom, preserves joins and never increases distances"""
    S = flow.carrier
    if flow(S.bottom) != S.bottom:
        raise ValidationError(f"{flow.name} does not fix the bottom element", witness=(S.bottom,))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x, y = S.sample(rng), S.sample(rng)
        fx, fy = flow(x), flow(y)
        if not (S.owns(fx) and S.owns(fy)):
            raise ValidationError(f"{flow.name} leaves the carrier {S.name}", witness=(x, y))
        if flow(S.join(x, y)) != S.join(fx, fy):
            raise ValidationError(f"{flow.name} does not preserve joins", witness=(x, y))
        if not S.dist(fx, fy) <= S.dist(x, y):
            raise ValidationError(f"{flow.name} is not contractive", witness=(x, y))
    flow.evidence = {'samples': samples, 'seed': seed}
    log('DYNAMICS', f"{flow.name} validated on {samples} sample pairs")
    return flow


def identity_flow(S):
    return Flow(S, lambda x: x, 'id', evidence={'exact': 'identity'})


def power_flow(flow, k):
    """The flow of phi^k on the same carrier"""
    if k < 1:
        raise ConfigError(f"power must be positive, got {k}")
    if k == 1:
        return flow
    root = flow.root or flow
    power = flow.power * k
    return Flow(flow.carrier, lambda x: flow.iterate(x, k), f"{root.name}^{power}",
                root=root, power=power, evidence=flow.evidence)


def inertia_distance(flow, x):
    flow.carrier.require(x)
    return flow.carrier.dist(x, flow(x))


def classify_element(flow, x):
    """invariant, inert or non_inert according to d(x, phi(x))"""
    d = inertia_distance(flow, x)
    if d.is_zero:
        return INVARIANT
    return INERT if d.is_finite else NON_INERT


def trajectory_prefix(flow, x, n):
    """[T_0, T_1, ..., T_n] with T_0 = bottom and T_(j+1) = x + phi(T_j)"""
    if n < 0:
        raise ConfigError(f"trajectory length must be non-negative, got {n}")
    S = flow.carrier
    S.require(x)
    out = [S.bottom]
    for _ in range(n):
        out.append(S.join(x, flow(out[-1])))
    return out


def trajectory(flow, x, n):
    return trajectory_prefix(flow, x, n)[-1]


@dataclass
class EntropyReport:
    """Entropy value with its provenance and the distance ladders behind it"""
    value: Rate
    method: str
    n_used: int
    delta_prefix: list
    c_prefix: list
    stabilization_confirmed: bool
    probe: object
    flow_name: str = ''
    lower_bound: bool = False
    candidates: list = field(default_factory=list)

    @property
    def exact(self):
        own = self.method == STABILIZED and self.stabilization_confirmed
        return own and all(c.exact for c in self.candidates)

    def to_json(self, carrier, base=None, base_label='e'):
        doc = {
            'flow': self.flow_name,
            'probe': carrier.to_json(self.probe),
            'value': self.value.to_json(base, base_label),
            'method': self.method,
            'n_used': self.n_used,
            'stabilization_confirmed': self.stabilization_confirmed,
            'exact': self.exact,
            'lower_bound': self.lower_bound,
            'delta_prefix': [d.to_json() for d in self.delta_prefix],
            'c_prefix': [c.to_json() for c in self.c_prefix],
        }
        if self.lower_bound:
            doc['closure_size'] = len(self.candidates)
            doc['candidates'] = [{'probe': carrier.to_json(c.probe),
                                  'value': c.value.to_json(base, base_label),
                                  'exact': c.exact} for c in self.candidates]
        return doc


def entropy_at(flow, x, n_max=DEFAULT_N_MAX, confirm_window=DEFAULT_CONFIRM_WINDOW):
    """
    Intrinsic entropy of phi at an inert probe

    Order-convex carriers with well-ordered values stop once delta_n has stayed
    constant for confirm_window steps; other carriers report min c_n / n, an upper
    bound on the limit. A stationary trajectory always stops with value 0.
    """
    if n_max < 2:
        raise ConfigError(f"n_max must be at least 2, got {n_max}")
    if confirm_window < 1:
        raise ConfigError(f"confirm_window must be positive, got {confirm_window}")
    S = flow.carrier
    S.require(x)
    x = S.canonical(x)
    if not S.dist(x, flow(x)).is_finite:
        raise PreconditionError(f"probe is not {flow.name}-inert: d(x, phi(x)) = inf")

    exact_route = S.order_convex and S.well_ordered_values
    deltas, costs = [], [ExtDist.zero(S.unit)]
    current = x
    stationary = confirmed = False
    for _ in range(n_max):
        following = S.join(x, flow(current))
        deltas.append(S.dist(current, following))
        costs.append(S.dist(x, following))
        if following == current:
            stationary = confirmed = True
            break
        current = following
        if exact_route and len(deltas) >= confirm_window and len(set(deltas[-confirm_window:])) == 1:
            confirmed = True
            break

    if stationary or exact_route:
        value, method = Rate(deltas[-1]), STABILIZED
    else:
        method = FEKETE_CAPPED
        value = Rate(costs[1], 1)
        for n in range(2, len(costs)):
            candidate = Rate(costs[n], n)
            if candidate < value:
                value = candidate
    if not confirmed and method == STABILIZED:
        log('WARNING', f"{flow.name}: delta did not settle within n_max={n_max}")
    return EntropyReport(value, method, len(deltas), deltas, costs, confirmed, x, flow.name)


def _unique(S, items):
    return list(dict.fromkeys(S.canonical(i) for i in items))


def probe_closure(flow, probes, closure_depth=DEFAULT_CLOSURE_DEPTH, budget=DEFAULT_CLOSURE_BUDGET):
    """
    Inert probes, their pairwise joins, then trajectories T_k (2 <= k <= closure_depth)
    of those under phi and, for power flows, under the root map

    Order is deterministic and the result is filtered to phi-inert elements.
    """
    S = flow.carrier
    S.require(*probes)
    base = _unique(S, [x for x in probes if classify_element(flow, x) != NON_INERT])
    if not base:
        raise PreconditionError(f"no probe is {flow.name}-inert")
    joined = list(base)
    for i, a in enumerate(base):
        joined.extend(S.join(a, b) for b in base[i + 1:])
    generators = [flow] if flow.root is None else [flow, flow.root]
    extended = list(joined)
    for y in joined:
        for g in generators:
            extended.extend(trajectory_prefix(g, y, closure_depth)[2:])
    closure = [c for c in _unique(S, extended) if classify_element(flow, c) != NON_INERT]
    return closure[:budget]


def _argmax(reports):
    best = reports[0]
    for r in reports[1:]:
        if r.value > best.value:
            best = r
    return best


def entropy_sup(flow, probes, closure_depth=DEFAULT_CLOSURE_DEPTH, n_max=DEFAULT_N_MAX,
                confirm_window=DEFAULT_CONFIRM_WINDOW, workers=None):
    """Largest entropy_at over the probe closure; a lower bound for the entropy of phi"""
    if not probes:
        raise PreconditionError("entropy_sup needs at least one probe")
    closure = probe_closure(flow, probes, closure_depth)
    reports = JobScheduler(workers).map(lambda c: entropy_at(flow, c, n_max, confirm_window), closure)
    best = _argmax(reports)
    log('DYNAMICS', f"{flow.name}: sup over {len(closure)} probes = {best.value}")
    return replace(best, lower_bound=True, candidates=reports)


# -- logarithmic law ---------------------------------------------------------

@dataclass
class LogLawReport:
    k: int
    lhs: Rate
    rhs: Rate
    verdict: str
    exact: bool
    lhs_witness: object
    rhs_witness: object
    closure_size: int
    local_failures: list = field(default_factory=list)
    certificate: dict = None

    def to_json(self, carrier, base=None, base_label='e'):
        doc = {
            'k': self.k,
            'lhs': self.lhs.to_json(base, base_label),
            'rhs': self.rhs.to_json(base, base_label),
            'verdict': self.verdict,
            'exact': self.exact,
            'lhs_witness': carrier.to_json(self.lhs_witness),
            'rhs_witness': carrier.to_json(self.rhs_witness),
            'closure_size': self.closure_size,
            'local_failures': [{'check': f['check'], 'probe': carrier.to_json(f['probe'])}
                               for f in self.local_failures],
        }
        if self.certificate is not None:
            doc['certificate'] = {
                'probe': carrier.to_json(self.certificate['probe']),
                'delta_prefix': [d.to_json() for d in self.certificate['delta_prefix']],
                'n_used': self.certificate['n_used'],
            }
        return doc


def check_loglaw(flow, probes, k, closure_depth=DEFAULT_CLOSURE_DEPTH, n_max=DEFAULT_N_MAX,
                 confirm_window=DEFAULT_CONFIRM_WINDOW, workers=None):
    """
    Compare k times the probe sup of phi with the probe sup of phi^k on one closure

    The closure reaches depth max(closure_depth, k) so that T_k of every base probe
    is present. Probes that are phi^k-inert but not phi-inert join the phi^k side;
    a strict gap is only reported when witnessed by such a probe.
    """
    if k < 1:
        raise ConfigError(f"k must be positive, got {k}")
    S = flow.carrier
    closure = probe_closure(flow, probes, max(closure_depth, k))
    pk = power_flow(flow, k)
    outside = _unique(S, [p for p in probes if classify_element(flow, p) == NON_INERT
                          and classify_element(pk, p) != NON_INERT])
    pool = JobScheduler(workers)
    base = pool.map(lambda c: entropy_at(flow, c, n_max, confirm_window), closure)
    powered = pool.map(lambda c: entropy_at(pk, c, n_max, confirm_window), closure + outside)
    lifted = pool.map(lambda c: entropy_at(pk, trajectory(flow, c, k), n_max, confirm_window), closure)

    local_failures = []
    for c, r1, rk, rl in zip(closure, base, powered, lifted):
        if r1.exact and rk.exact and rk.value > r1.value.times(k):
            local_failures.append({'check': 'power_bound', 'probe': c})
        if r1.exact and rl.exact and rl.value != r1.value.times(k):
            local_failures.append({'check': 'trajectory_loglaw', 'probe': c})

    lhs_best, rhs_best = _argmax(base), _argmax(powered)
    lhs, rhs = lhs_best.value.times(k), rhs_best.value
    exact = all(r.exact for r in base + powered)
    certificate = None
    if not exact:
        verdict = INCONCLUSIVE
    elif lhs > rhs or local_failures:
        verdict = VIOLATION
    elif rhs > lhs:
        if any(rhs_best.probe == c for c in closure):
            verdict = VIOLATION
        else:
            verdict = STRICT_GAP
            certificate = {'probe': rhs_best.probe, 'delta_prefix': rhs_best.delta_prefix,
                           'n_used': rhs_best.n_used}
    else:
        verdict = EQUALITY
    log('DYNAMICS', f"{flow.name}, k={k}: {lhs} vs {rhs} -> {verdict}")
    return LogLawReport(k, lhs, rhs, verdict, exact, lhs_best.probe, rhs_best.probe, len(closure),
                        local_failures, certificate)


# -- conjugation and morphisms -----------------------------------------------

def _same_report(a, b):
    return (a.value == b.value and a.method == b.method and a.n_used == b.n_used
            and a.delta_prefix == b.delta_prefix and a.c_prefix == b.c_prefix
            and a.stabilization_confirmed == b.stabilization_confirmed)


@dataclass
class ConjugationReport:
    matched: int
    mismatches: list
    samples: int

    @property
    def ok(self):
        return not self.mismatches

    def to_json(self, carrier_a, carrier_b):
        return {
            'ok': self.ok,
            'matched': self.matched,
            'samples': self.samples,
            'mismatches': [{'kind': m['kind'], 'probe': (carrier_a if m['side'] == 'A' else carrier_b).to_json(m['probe'])}
                           for m in self.mismatches],
        }


def check_conjugation(flowA, flowB, iso, probes, inverse=None, samples=DEFAULT_VALIDATION_SAMPLES, seed=0,
                      n_max=DEFAULT_N_MAX, confirm_window=DEFAULT_CONFIRM_WINDOW):
    """
    Verify that a sample-checked isometric isomorphism intertwining the flows carries
    classifications and entropy reports over unchanged

    Raises:
        ValidationError: iso fails an isometry, join, bottom or equivariance check
    """
    SA, SB = flowA.carrier, flowB.carrier
    if iso(SA.bottom) != SB.bottom:
        raise ValidationError("iso does not map bottom to bottom", witness=(SA.bottom,))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x, y = SA.sample(rng), SA.sample(rng)
        ix, iy = iso(x), iso(y)
        if not (SB.owns(ix) and SB.owns(iy)):
            raise ValidationError("iso leaves the target carrier", witness=(x, y))
        if SB.dist(ix, iy) != SA.dist(x, y):
            raise ValidationError("iso is not an isometry", witness=(x, y))
        if iso(SA.join(x, y)) != SB.join(ix, iy):
            raise ValidationError("iso does not preserve joins", witness=(x, y))
        if iso(flowA(x)) != flowB(ix):
            raise ValidationError("iso does not intertwine the flows", witness=(x, y))
        if inverse is not None and inverse(ix) != SA.canonical(x):
            raise ValidationError("inverse does not undo iso", witness=(x, y))

    matched, mismatches = 0, []
    for x in probes:
        ix = iso(x)
        ca, cb = classify_element(flowA, x), classify_element(flowB, ix)
        if ca != cb:
            mismatches.append({'kind': 'classification', 'side': 'A', 'probe': x})
            continue
        if ca != NON_INERT:
            ra = entropy_at(flowA, x, n_max, confirm_window)
            rb = entropy_at(flowB, ix, n_max, confirm_window)
            if not _same_report(ra, rb):
                mismatches.append({'kind': 'entropy', 'side': 'A', 'probe': x})
                continue
        matched += 1
    if inverse is not None:
        for _ in range(samples):
            y = SB.sample(rng)
            if classify_element(flowB, y) != classify_element(flowA, inverse(y)):
                mismatches.append({'kind': 'classification_reverse', 'side': 'B', 'probe': y})
    log('DYNAMICS', f"conjugation {flowA.name} ~ {flowB.name}: {matched} matched, {len(mismatches)} mismatches")
    return ConjugationReport(matched, mismatches, samples)


@dataclass
class MorphismReport:
    isometric: bool
    injective: bool
    checked: int
    failures: list

    @property
    def ok(self):
        return not self.failures


def check_morphism(flowA, flowB, alpha, probes, n=NESTED_STEPS, samples=DEFAULT_VALIDATION_SAMPLES, seed=0,
                   n_max=SUITE_N_MAX, confirm_window=DEFAULT_CONFIRM_WINDOW):
    """
    Morphism of flows alpha: A -> B (contractive homomorphism with alpha.phi1 = phi2.alpha)

    Checks that inert probes map to inert elements, that alpha carries trajectories
    to trajectories, and that entropy at alpha(x) never exceeds entropy at x, with
    equality when alpha is an injective isometry on the samples.
    """
    SA, SB = flowA.carrier, flowB.carrier
    if alpha(SA.bottom) != SB.bottom:
        raise ValidationError("alpha does not map bottom to bottom", witness=(SA.bottom,))
    rng = np.random.default_rng(seed)
    isometric = injective = True
    for _ in range(samples):
        x, y = SA.sample(rng), SA.sample(rng)
        ax, ay = alpha(x), alpha(y)
        if alpha(SA.join(x, y)) != SB.join(ax, ay):
            raise ValidationError("alpha does not preserve joins", witness=(x, y))
        if not SB.dist(ax, ay) <= SA.dist(x, y):
            raise ValidationError("alpha is not contractive", witness=(x, y))
        if alpha(flowA(x)) != flowB(ax):
            raise ValidationError("alpha does not intertwine the flows", witness=(x, y))
        isometric = isometric and SB.dist(ax, ay) == SA.dist(x, y)
        injective = injective and (ax != ay or SA.canonical(x) == SA.canonical(y))

    failures, checked = [], 0
    for x in probes:
        checked += 1
        ax = alpha(x)
        inert = classify_element(flowA, x) != NON_INERT
        if inert and classify_element(flowB, ax) == NON_INERT:
            failures.append({'check': 'inert_preserved', 'probe': x})
        ta, tb = trajectory_prefix(flowA, x, n), trajectory_prefix(flowB, ax, n)
        if any(alpha(a) != b for a, b in zip(ta, tb)):
            failures.append({'check': 'trajectory', 'probe': x})
        if inert:
            ra, rb = entropy_at(flowA, x, n_max, confirm_window), entropy_at(flowB, ax, n_max, confirm_window)
            if ra.exact and rb.exact:
                ok = rb.value == ra.value if (isometric and injective) else rb.value <= ra.value
                if not ok:
                    failures.append({'check': 'entropy', 'probe': x})
    return MorphismReport(isometric, injective, checked, failures)


# -- restricted full inertness -----------------------------------------------

class OmegaSet:
    """A finite family of validated flows on one carrier"""

    def __init__(self, carrier, members):
        members = list(members)
        for f in members:
            if f.carrier is not carrier:
                raise ValidationError(f"{f.name} acts on {f.carrier.name}, not {carrier.name}")
            if not f.contractivity_checked:
                raise ValidationError(f"{f.name} has not been validated")
        self.carrier = carrier
        self.members = members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass
class OmegaInertia:
    invariant: bool
    inert: bool
    uniform_bound: ExtDist
    per_member: list

    def to_json(self):
        return {'invariant': self.invariant, 'inert': self.inert,
                'uniform_bound': self.uniform_bound.to_json(),
                'per_member': [{'flow': name, 'distance': d.to_json()} for name, d in self.per_member]}


def omega_inertia(S, x, omega):
    """Invariance, inertness and the least uniform bound of x over a finite family"""
    if len(omega) == 0:
        raise PreconditionError("the endomorphism family is empty")
    if omega.carrier is not S:
        raise ValidationError("the endomorphism family acts on another carrier")
    S.require(x)
    per_member = [(f.name, S.dist(x, f(x))) for f in omega]
    bound = max((d for _, d in per_member), default=ExtDist.zero(S.unit))
    return OmegaInertia(
        invariant=all(d.is_zero for _, d in per_member),
        inert=all(d.is_finite for _, d in per_member),
        uniform_bound=bound,
        per_member=per_member,
    )


# -- property suite ----------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    witness: dict = None

    def record(self, ok, witness):
        if ok:
            self.passed += 1
            return
        self.failed += 1
        if self.witness is None:
            self.witness = witness()

    def merge(self, other):
        self.passed += other.passed
        self.failed += other.failed
        if self.witness is None:
            self.witness = other.witness


@dataclass
class SuiteReport:
    flow_name: str
    n: int
    probes: int
    checks: dict

    @property
    def ok(self):
        return all(c.failed == 0 for c in self.checks.values())

    def to_json(self, carrier):
        def render(w):
            if w is None:
                return None
            return {k: (v.to_json() if isinstance(v, (ExtDist,)) else
                        carrier.to_json(v) if carrier.owns(v) else v) for k, v in w.items()}
        return {
            'flow': self.flow_name,
            'n': self.n,
            'probes': self.probes,
            'ok': self.ok,
            'checks': {name: {'passed': c.passed, 'failed': c.failed, 'witness': render(c.witness)}
                       for name, c in sorted(self.checks.items())},
        }


class _Checks(dict):
    def __call__(self, name, ok, witness):
        self.setdefault(name, CheckResult(name)).record(ok, witness)


def _probe_checks(flow, x, n, pair_limit, n_max, confirm_window):
    S = flow.carrier
    check = _Checks()
    T = trajectory_prefix(flow, x, n + 1)
    deltas = [S.dist(T[j], T[j + 1]) for j in range(1, n + 1)]
    costs = [S.dist(x, T[j + 1]) for j in range(0, n + 1)]
    step = S.dist(x, flow(x))

    for j in range(1, len(deltas)):
        check('delta_monotone', deltas[j] <= deltas[j - 1],
              lambda j=j: {'probe': x, 'n': j + 1, 'delta_n': deltas[j], 'delta_prev': deltas[j - 1]})
    for a in range(1, n + 1):
        for b in range(1, n + 1 - a):
            check('cost_subadditive', costs[a + b] <= costs[a] + costs[b],
                  lambda a=a, b=b: {'probe': x, 'm': a, 'n': b})

    if S.order_convex:
        for a in range(1, n + 1):
            for b in range(1, n + 2 - a):
                if b > 1 and a + b > pair_limit:
                    break
                lhs = S.dist(x, T[a + b])
                rhs = S.dist(x, T[a]) + S.dist(T[a], T[a + b])
                check('oc_additivity', lhs == rhs, lambda a=a, b=b, lhs=lhs, rhs=rhs:
                      {'probe': x, 'n': a, 'm': b, 'lhs': lhs, 'rhs': rhs})

    powers = [x]
    for j in range(1, n + 1):
        powers.append(flow(powers[-1]))
    for j in range(1, n + 2):
        d = S.dist(x, T[j])
        check('linear_bound', d <= step.scale(j - 1), lambda j=j, d=d: {'probe': x, 'n': j, 'd_x_Tn': d})
    for j in range(1, n + 1):
        d_power = S.dist(x, powers[j])
        ok = d_power.is_finite and S.dist(x, T[j + 1]).is_finite and d_power <= S.dist(x, T[j + 1])
        check('inertness_equivalence', ok, lambda j=j: {'probe': x, 'n': j})

    for i in range(1, NESTED_LIMIT + 1):
        power = power_flow(flow, i)
        for m in range(i, NESTED_LIMIT + 1):
            nested = trajectory_prefix(power, T[m], NESTED_STEPS) if m <= n + 1 else []
            for steps in range(1, len(nested)):
                target = (steps - 1) * i + m
                if target > n + 1:
                    break
                check('nested_trajectory', nested[steps] == T[target],
                      lambda i=i, m=m, steps=steps: {'probe': x, 'i': i, 'm': m, 'n': steps})

    for k in range(1, min(n, NESTED_STEPS) + 1):
        bound = S.dist(x, powers[k])
        if not bound.is_finite:
            continue
        Tk = T[k]
        check('trajectory_inert', S.dist(Tk, flow(Tk)) <= bound, lambda k=k: {'probe': x, 'k': k})

    base = entropy_at(flow, x, n_max, confirm_window)
    for k in (2, 3):
        if k > n + 1:
            continue
        at_traj = entropy_at(flow, T[k], n_max, confirm_window)
        if base.exact and at_traj.exact:
            check('trajectory_probe_entropy', at_traj.value == base.value, lambda k=k: {'probe': x, 'k': k})
        lifted = entropy_at(power_flow(flow, k), T[k], n_max, confirm_window)
        if base.exact and lifted.exact:
            check('trajectory_loglaw', lifted.value == base.value.times(k), lambda k=k: {'probe': x, 'k': k})

    for a in range(1, pair_limit):
        for b in range(1, pair_limit - a + 1):
            if a + b > n + 1 or b + 1 > n + 1:
                continue
            lhs = S.dist(T[a], T[a + b])
            rhs = S.dist(x, T[b + 1]).scale(a)
            check('tail_bound', lhs <= rhs, lambda a=a, b=b: {'probe': x, 'n': a, 'm': b})

    check('image_inert', classify_element(flow, flow(x)) != NON_INERT, lambda: {'probe': x})
    return check


def _pair_checks(flow, x, y, n, pair_limit):
    S = flow.carrier
    check = _Checks()
    cx, cy = classify_element(flow, x), classify_element(flow, y)
    j = S.join(x, y)
    check('join_inert', classify_element(flow, j) != NON_INERT, lambda: {'x': x, 'y': y})
    if cx == INVARIANT and cy == INVARIANT:
        check('join_invariant', classify_element(flow, j) == INVARIANT, lambda: {'x': x, 'y': y})
    if close(S, x, y):
        bound = S.dist(y, x) + S.dist(x, flow(x)) + S.dist(x, y)
        check('closeness_transfer', S.dist(y, flow(y)) <= bound, lambda: {'x': x, 'y': y})
    dxy = S.dist(x, y)
    tx, ty = trajectory_prefix(flow, x, min(n, pair_limit)), trajectory_prefix(flow, y, min(n, pair_limit))
    for k in range(1, len(tx)):
        check('trajectory_pair_bound', S.dist(tx[k], ty[k]) <= dxy.scale(k), lambda k=k: {'x': x, 'y': y, 'n': k})
    return check


def property_suite(flow, probes, n, pair_limit=DEFAULT_PAIR_LIMIT, n_max=SUITE_N_MAX,
                   confirm_window=DEFAULT_CONFIRM_WINDOW, workers=None):
    """
    Run the trajectory lemma checks along every probe's trajectory up to length n

    OC additivity is checked for every consecutive step and for all index pairs
    with n + m <= pair_limit; pair checks use ordered pairs of distinct probes.
    Failures are reported, never raised.
    """
    if n < 1:
        raise ConfigError(f"suite length must be positive, got {n}")
    S = flow.carrier
    probes = _unique(S, probes)
    for x in probes:
        if classify_element(flow, x) == NON_INERT:
            raise PreconditionError(f"probe {S.to_json(x)} is not {flow.name}-inert")
    pool = JobScheduler(workers)
    per_probe = pool.map(lambda x: _probe_checks(flow, x, n, pair_limit, n_max, confirm_window), probes)
    pairs = [(a, b) for a in probes for b in probes if a != b]
    per_pair = pool.map(lambda p: _pair_checks(flow, p[0], p[1], n, pair_limit), pairs)
    merged = {}
    for result in per_probe + per_pair:
        for name, c in result.items():
            merged.setdefault(name, CheckResult(name)).merge(c)
    report = SuiteReport(flow.name, n, len(probes), merged)
    log('DYNAMICS', f"suite {flow.name}: {sum(c.failed for c in merged.values())} failures")
    return report
