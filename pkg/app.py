"""
gqm command line
Runs a scenario through one of the entropy, axiom, oracle or scanner commands and prints a
report document on standard output

Exit codes: 0 success, 1 property violation found, 2 input error.
"""
import csv
import io
import json

import click

from carriers_finite import FiniteAbelianGroup, VectorSpace
from carriers_windowed import DirectSumCarrier, ProfiniteCarrier
from core import DistortedCarrier, GqmError, ScenarioError, check_axioms, check_axioms_exhaustive, log
from dynamics import (NON_INERT, STRICT_GAP, SUITE_N_MAX, VIOLATION, check_conjugation, check_loglaw,
                      classify_element, entropy_at, entropy_sup, property_suite)
from functors import adjoint_step_identity, check_trajectory_identity, named_entropy
from oracle import diff_direct_sum, diff_finite_group, diff_profinite, diff_subspaces
from scanners import LogLawScanner, UniformInertScanner
from scenario import LOG_BASES, SCHEMA_VERSION, load_scenario
from scheduler import configured_workers

TOOL = 'gqm'
VERSION = '1.0.0'

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2

FORMATS = ('json', 'csv')


def _document(command, scenario, success, exit_code, result=None, error=None):
    doc = {
        'tool': TOOL,
        'version': VERSION,
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'success': success,
        'exit_code': exit_code,
    }
    if scenario is not None:
        doc['scenario'] = scenario.document
        doc['config'] = scenario.config
    if result is not None:
        doc['result'] = result
    if error is not None:
        doc['error'] = error
    return doc


def _dump(doc):
    return json.dumps(doc, sort_keys=True, indent=2)


def _ladder_csv(reports, base):
    """One row per trajectory step of every report: the per-step increment and the accumulated cost"""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(['probe', 'n', 'unit', 'delta', 'delta_float', 'cost', 'cost_float'])
    for index, report in enumerate(reports):
        for n, delta in enumerate(report.delta_prefix, start=1):
            cost = report.c_prefix[n]
            unit = delta.to_json()['unit']
            writer.writerow([index, n, unit, delta.magnitude if delta.is_finite else 'inf',
                             delta.to_float(base=base), cost.magnitude if cost.is_finite else 'inf',
                             cost.to_float(base=base)])
    return out.getvalue()


def run(ctx, command, scenario_path, overrides, fmt, body):
    """
    Load the scenario, run one command body and print its report

    body(scenario, workers) returns (result, violated, ladder) where ladder is the
    list of EntropyReports a CSV rendering would tabulate, or None.
    """
    scenario = None
    try:
        workers = configured_workers()
        scenario = load_scenario(scenario_path, overrides)
        result, violated, ladder = body(scenario, workers)
    except GqmError as e:
        click.echo(f"[ERROR] {e}", err=True)
        error = {'type': type(e).__name__, 'message': str(e)}
        if isinstance(e, ScenarioError):
            error['path'] = e.path
        click.echo(_dump(_document(command, scenario, False, EXIT_INPUT, error=error)))
        ctx.exit(EXIT_INPUT)
    code = EXIT_VIOLATION if violated else EXIT_OK
    if fmt == 'csv':
        if ladder is None:
            click.echo("[ERROR] csv output is only available for distance ladders (entropy, named)", err=True)
            click.echo(_dump(_document(command, scenario, False, EXIT_INPUT,
                                       error={'type': 'ConfigError', 'message': 'csv not available'})))
            ctx.exit(EXIT_INPUT)
        base, _ = scenario.log_base()
        click.echo(_ladder_csv(ladder, base), nl=False)
    else:
        click.echo(_dump(_document(command, scenario, not violated, code, result=result)))
    log('APP', f"{command} finished with exit code {code}")
    ctx.exit(code)


def _require_probes(scenario):
    if not scenario.probes:
        raise ScenarioError("this command needs probes", '/probes')
    return scenario.probes


# -- command bodies ----------------------------------------------------------

def axioms_body(scenario, workers):
    S, config = scenario.carrier, scenario.config
    if config['exhaustive']:
        finite = S.base if isinstance(S, DistortedCarrier) else S
        if not hasattr(finite, 'elements'):
            raise ScenarioError("exhaustive audits need a finite carrier", '/config/exhaustive')
        report = check_axioms_exhaustive(S, finite.elements())
    else:
        report = check_axioms(S, config['samples'], config['seed'], workers)
    return report.to_json(S), not report.ok, None


def entropy_body(scenario, workers):
    config = scenario.config
    flow = scenario.flow()
    probes = _require_probes(scenario)
    base, label = scenario.log_base()
    kinds = [classify_element(flow, x) for x in probes]
    inert = [x for x, kind in zip(probes, kinds) if kind != NON_INERT]
    best = entropy_sup(flow, probes, config['closure_depth'], config['n_max'], config['confirm_window'], workers)
    per_probe = [entropy_at(flow, x, config['n_max'], config['confirm_window']) for x in inert]
    result = {
        'flow': flow.name,
        'carrier': flow.carrier.name,
        'per_probe': [r.to_json(flow.carrier, base, label) for r in per_probe],
        'skipped': [{'probe': flow.carrier.to_json(x), 'reason': kind}
                    for x, kind in zip(probes, kinds) if kind == NON_INERT],
        'sup': best.to_json(flow.carrier, base, label),
    }
    return result, False, per_probe


def named_body(scenario, workers):
    if scenario.named is None:
        raise ScenarioError("the named command needs functor.named", '/functor')
    config = scenario.config
    base, label = scenario.log_base()
    report = named_entropy(scenario.named, scenario.obj, scenario.require_endo(), _require_probes(scenario),
                           config['closure_depth'], config['n_max'], config['confirm_window'],
                           scenario.restricted, workers)
    result = {'entropy': scenario.named.value, 'restricted': scenario.restricted,
              'report': report.to_json(scenario.carrier, base, label)}
    return result, False, report.candidates


def loglaw_body(scenario, workers):
    config = scenario.config
    flow = scenario.flow()
    probes = _require_probes(scenario)
    base, label = scenario.log_base()
    reports = [check_loglaw(flow, probes, k, config['closure_depth'], config['n_max'], config['confirm_window'],
                            workers) for k in config['ks']]
    result = {'flow': flow.name, 'laws': [r.to_json(flow.carrier, base, label) for r in reports]}
    return result, any(r.verdict == VIOLATION for r in reports), None


def conjugacy_body(scenario, workers):
    config = scenario.config
    if scenario.conjugacy is None:
        raise ScenarioError("the conjugacy command needs a conjugacy block", '/conjugacy')
    conj = scenario.conjugacy
    flow_a = scenario.flow()
    flow_b = scenario.flow(endo=conj.endo)
    report = check_conjugation(flow_a, flow_b, conj.iso, _require_probes(scenario), conj.inverse,
                               config['samples'], config['seed'], config['n_max'], config['confirm_window'])
    result = {'iso': conj.label, 'flow_a': flow_a.name, 'flow_b': flow_b.name,
              'report': report.to_json(flow_a.carrier, flow_b.carrier)}
    return result, not report.ok, None


def suite_body(scenario, workers):
    config = scenario.config
    flow = scenario.flow()
    probes = _require_probes(scenario)
    n = config['suite_n']
    suite = property_suite(flow, probes, n, config['pair_limit'], min(config['n_max'], SUITE_N_MAX),
                           config['confirm_window'], workers)
    identities = [check_trajectory_identity(flow, probes, n)]
    if isinstance(scenario.obj, FiniteAbelianGroup):
        identities.append(adjoint_step_identity(scenario.obj, scenario.endo, probes, n))
    result = {'suite': suite.to_json(flow.carrier),
              'identities': [i.to_json(flow.carrier) for i in identities]}
    return result, not (suite.ok and all(i.ok for i in identities)), None


def oracle_body(scenario, workers):
    obj, S = scenario.obj, scenario.carrier
    endo = scenario.endo
    if isinstance(S, DirectSumCarrier):
        elements = list(_require_probes(scenario))
        if endo is not None:
            flow = scenario.flow()
            elements += [flow(x) for x in elements]
        report = diff_direct_sum(S, elements, endo)
    elif isinstance(S, ProfiniteCarrier):
        report = diff_profinite(S, _require_probes(scenario), endo)
    elif isinstance(obj, VectorSpace):
        report = diff_subspaces(obj, [endo] if endo else None, seed=scenario.config['seed'])
    else:
        report = diff_finite_group(obj, [endo] if endo else None)
    return report.to_json(), not report.ok, None


def scan_body(scenario, workers):
    config = scenario.config
    flow = scenario.flow()
    probes = _require_probes(scenario)
    loglaw = LogLawScanner(config['ks'], config['closure_depth'], config['n_max'], config['confirm_window'],
                           workers)
    reports = loglaw.scan(flow, probes)
    result = {'loglaw': {'status': loglaw.get_status(), 'evidence': loglaw.evidence}}
    if scenario.omega_endos:
        inert = UniformInertScanner()
        inert.scan(scenario.carrier, scenario.omega(), probes)
        result['uniform_inert'] = {'status': inert.get_status(), 'evidence': inert.evidence}
    if loglaw.candidates:
        log('APP', f"{len(loglaw.candidates)} {STRICT_GAP} candidates recorded")
    return result, any(r.verdict == VIOLATION for r in reports), None


# -- click surface -----------------------------------------------------------

def scenario_command(name, body, help_text):
    @click.argument('scenario_path', type=click.Path(dir_okay=False))
    @click.option('--seed', type=int, default=None, help='Sampling seed')
    @click.option('--n-max', type=int, default=None, help='Trajectory length cap')
    @click.option('--confirm-window', type=int, default=None, help='Steps delta must stay constant')
    @click.option('--closure-depth', type=int, default=None, help='Probe closure depth')
    @click.option('--log-base', type=click.Choice(LOG_BASES), default=None, help='Base for float renderings')
    @click.option('--format', 'fmt', type=click.Choice(FORMATS), default='json', help='Report format')
    @click.pass_context
    def command(ctx, scenario_path, seed, n_max, confirm_window, closure_depth, log_base, fmt):
        overrides = {'seed': seed, 'n_max': n_max, 'confirm_window': confirm_window,
                     'closure_depth': closure_depth, 'log_base': log_base}
        run(ctx, name, scenario_path, overrides, fmt, body)

    return cli.command(name, help=help_text)(command)


@click.group()
@click.version_option(VERSION, prog_name=TOOL)
def cli():
    """Intrinsic entropy of contractive endomorphisms on quasimetric semilattices"""


scenario_command('axioms', axioms_body, 'Audit the carrier axioms (sampled, or exhaustive on finite carriers)')
scenario_command('entropy', entropy_body, 'Entropy at each probe and the probe-closure lower bound')
scenario_command('named', named_body, 'One of the six named entropies of the scenario endomorphism')
scenario_command('loglaw', loglaw_body, 'Compare k * h(phi) with h(phi^k) for every configured k')
scenario_command('conjugacy', conjugacy_body, 'Check that a conjugating isometry preserves the entropy reports')
scenario_command('suite', suite_body, 'Run the trajectory property suite and the lifting identities')
scenario_command('oracle', oracle_body, 'Diff the exact carrier operations against element enumeration')
scenario_command('scan', scan_body, 'Gather evidence on the logarithmic law and uniform inertness')


def main():
    cli(prog_name=TOOL)


if __name__ == "__main__":
    main()
