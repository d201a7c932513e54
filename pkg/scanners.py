"""
Evidence Scanners for gqm
Batch jobs that gather certified evidence on two open questions without asserting either:
whether k * h(phi) < h(phi^k) can happen, and whether every uniformly inert element is
close to an invariant one
"""
from core import BudgetError, close, generated_subsemilattice, log
from dynamics import (DEFAULT_CLOSURE_DEPTH, DEFAULT_CONFIRM_WINDOW, DEFAULT_N_MAX, EQUALITY, INCONCLUSIVE,
                      STRICT_GAP, VIOLATION, check_loglaw, omega_inertia)

RESOLVED = 'resolved'
OPEN = 'open'
NOT_INERT = 'not_inert'
INVARIANT = 'invariant'


class LogLawScanner:
    """Sweeps check_loglaw over several exponents and keeps every strict-gap candidate"""

    def __init__(self, ks=(2, 3, 4), closure_depth=DEFAULT_CLOSURE_DEPTH, n_max=DEFAULT_N_MAX,
                 confirm_window=DEFAULT_CONFIRM_WINDOW, workers=None):
        """
        Args:
            ks: exponents to test
            closure_depth: probe closure depth handed to check_loglaw
            n_max: trajectory cap per probe
            confirm_window: stabilization window per probe
            workers: fan-out width (None reads GQM_WORKERS)
        """
        self.ks = tuple(ks)
        self.closure_depth = closure_depth
        self.n_max = n_max
        self.confirm_window = confirm_window
        self.workers = workers
        self.evidence = []
        self.candidates = []
        self.scans = 0
        log('SCANNER', f"log-law scanner ready (k in {list(self.ks)})")

    def scan(self, flow, probes):
        """Run every exponent on one flow; returns the LogLawReports in exponent order"""
        reports = []
        for k in self.ks:
            report = check_loglaw(flow, probes, k, self.closure_depth, self.n_max, self.confirm_window,
                                  self.workers)
            reports.append(report)
            entry = {'flow': flow.name, 'k': k, 'verdict': report.verdict,
                     'report': report.to_json(flow.carrier)}
            self.evidence.append(entry)
            if report.verdict == STRICT_GAP:
                self.candidates.append(entry)
                log('SCANNER', f"strict gap candidate for {flow.name} at k={k}: {report.lhs} < {report.rhs}")
            elif report.verdict == VIOLATION:
                log('WARNING', f"{flow.name} violates the logarithmic law at k={k}")
        self.scans += 1
        return reports

    def get_status(self):
        counts = {v: 0 for v in (EQUALITY, STRICT_GAP, VIOLATION, INCONCLUSIVE)}
        for entry in self.evidence:
            counts[entry['verdict']] += 1
        return {
            'ks': list(self.ks),
            'closure_depth': self.closure_depth,
            'n_max': self.n_max,
            'confirm_window': self.confirm_window,
            'scans': self.scans,
            'verdicts': counts,
            'strict_gap_candidates': len(self.candidates),
        }


class UniformInertScanner:
    """
    For each probe that is inert under every member of a finite family, look for a
    family-invariant element close to it

    Candidates are the bottom element plus the subsemilattice generated by the orbit
    of the probe under words of length <= orbit_depth in the family, and the probe's
    saturation x + sum phi(x) iterated saturation_steps times.
    """

    def __init__(self, orbit_depth=2, saturation_steps=8, budget=256):
        self.orbit_depth = orbit_depth
        self.saturation_steps = saturation_steps
        self.budget = budget
        self.evidence = []
        self.scans = 0
        log('SCANNER', f"uniform inertness scanner ready (orbit depth {orbit_depth})")

    def _orbit(self, omega, x):
        layer, orbit = [x], [x]
        for _ in range(self.orbit_depth):
            layer = [f(y) for y in layer for f in omega]
            orbit.extend(layer)
        return list(dict.fromkeys(orbit))

    def _saturation(self, S, omega, x):
        current = x
        chain = [x]
        for _ in range(self.saturation_steps):
            following = current
            for f in omega:
                following = S.join(following, f(current))
            if following == current:
                break
            chain.append(following)
            current = following
        return chain

    def _candidates(self, S, omega, x):
        pool = [S.bottom] + self._saturation(S, omega, x)
        try:
            pool.extend(generated_subsemilattice(S, self._orbit(omega, x), self.budget))
        except BudgetError:
            log('SCANNER', f"orbit subsemilattice exceeds {self.budget} elements; using the orbit itself")
            pool.extend(self._orbit(omega, x))
        return list(dict.fromkeys(pool))

    def scan(self, carrier, omega, probes):
        """Classify each probe; returns the evidence entries added by this scan"""
        S = carrier
        added = []
        for x in probes:
            x = S.canonical(x)
            status = omega_inertia(S, x, omega)
            entry = {'probe': S.to_json(x), 'uniform_bound': status.uniform_bound.to_json(), 'witness': None}
            if not status.inert:
                entry['status'] = NOT_INERT
            elif status.invariant:
                entry['status'] = INVARIANT
            else:
                witness = next((y for y in self._candidates(S, omega, x)
                                if omega_inertia(S, y, omega).invariant and close(S, x, y)), None)
                entry['status'] = RESOLVED if witness is not None else OPEN
                if witness is not None:
                    entry['witness'] = S.to_json(witness)
                else:
                    log('SCANNER', f"no close invariant element found for {entry['probe']}")
            added.append(entry)
        self.evidence.extend(added)
        self.scans += 1
        return added

    def get_status(self):
        counts = {s: 0 for s in (RESOLVED, OPEN, NOT_INERT, INVARIANT)}
        for entry in self.evidence:
            counts[entry['status']] += 1
        return {
            'orbit_depth': self.orbit_depth,
            'saturation_steps': self.saturation_steps,
            'budget': self.budget,
            'scans': self.scans,
            'statuses': counts,
        }
