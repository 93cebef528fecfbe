#!/usr/bin/env python
import argparse
import datetime
import logging
import math
import os.path
import sys
import time

# Used to trigger loading the audits
import rician_lattice_analyzer.audits

from rician_lattice_analyzer import analysis, channel, decoder, rotations
from rician_lattice_analyzer.core import (AuditPackage, ConfigurationSettings, NegativeK, NumericalFailure,
                                          UnsupportedOrder, UsageError, get_lattice_audits)
from rician_lattice_analyzer.lattice_helpers import hadamard_of, load_lattice, load_rotation_lattice
from rician_lattice_analyzer.scripts import lattice_details

DEFAULT_CONFIG_DIR = os.path.expanduser("~" + os.sep + ".lattice_analyzer" + os.sep)
DEFAULT_CONFIGFILE = DEFAULT_CONFIG_DIR + "WORKBENCH.cfg"
EXECUTION_START_TIME = datetime.datetime.today().strftime('%Y%m%d_%H%M%S')
logger = logging.getLogger('rician_lattice_analyzer')

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


###############################################################################
# General helper functions
###############################################################################
def configure_logging(enable_debug_log, console_enabled):
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    formatter = logging.Formatter('%(name)s - %(levelname)s - %(message)s')

    if enable_debug_log:
        logfile_path = f'lattice_analyzer_debug_{EXECUTION_START_TIME}.log'
        fh = logging.FileHandler(logfile_path)
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    if console_enabled:
        # stderr, so CSV on stdout stays clean
        ch = logging.StreamHandler(sys.stderr)
        ch.setLevel(logging.INFO)
        ch.setFormatter(formatter)
        logger.addHandler(ch)


def parse_float_list(text):
    try:
        values = [float(field) for field in text.split(',') if field.strip()]
    except ValueError:
        raise UsageError(f"Expected a comma-separated list of numbers, got '{text}'")
    if not values:
        raise UsageError("Expected at least one value in the list")
    return values


def parse_k_list(text):
    values = parse_float_list(text)
    for K in values:
        if K < 0:
            raise NegativeK(f"Rician factor must be nonnegative, got K = {K}")
    return values


def vnr_grid(start, stop, step):
    if not step > 0:
        raise UsageError(f"--vnr-step must be positive, got {step}")
    if stop < start:
        raise UsageError(f"--vnr-stop ({stop}) must not be below --vnr-start ({start})")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def resolve(value, settings, key, convert=int):
    """Command line flags win over the config file"""
    if value is not None:
        return value
    return convert(settings.get(key))


def run_lattice_audits(audits, auditpackage):
    problems = {}
    total_findings = 0
    total_checks = 0
    logger.info("Running audits")

    for name, audit_values in audits.items():
        audit_name, audit_description, audit_function = audit_values
        findings, count_checks = audit_function(auditpackage)
        problems[(audit_name, audit_description), count_checks] = findings
        total_findings += len(findings)
        total_checks += count_checks
    return problems, total_findings, total_checks


###############################################################################
# Commands
###############################################################################
def cmd_audit(parsed_args, settings):
    start_time = time.time()
    lattice = load_lattice(parsed_args.lattice, parsed_args.dim, parsed_args.unit_volume)
    radius = resolve(parsed_args.radius, settings, 'audit radius', float)
    auditpackage = AuditPackage(name=lattice.name, lattice=lattice, settings=settings,
                                hadamard=hadamard_of(parsed_args.lattice, lattice), radius=radius)

    if parsed_args.audit:
        audits = {audit: get_lattice_audits()[audit] for audit in parsed_args.audit}
    else:
        audits = get_lattice_audits()
    problems, total_findings, total_checks = run_lattice_audits(audits, auditpackage)

    if parsed_args.output_format == 'json':
        report = lattice_details.format_audit_report_json(problems, lattice, total_checks, EXECUTION_START_TIME,
                                                          time.time() - start_time)
    else:
        report = lattice_details.format_audit_report_text(problems, lattice)
    lattice_details.write_output(report, parsed_args.out)
    logger.info(f"Audit of {lattice.name} took {round(time.time() - start_time, 2)} seconds")
    return 0


def _simulate(rotation_specs, dim, q, grid, trials, seed, threads, block_size, unit_volume=False):
    """
    grid holds (K, vnr_db) pairs. Grid point p uses the trial counters
    p*trials .. (p+1)*trials - 1 for every rotation, so rotations are
    compared on the same draws. Specs may name non-orthogonal generator
    files; every lattice is carved the same way.
    """
    results = []
    total = len(rotation_specs) * len(grid)
    constellations = []
    for spec in rotation_specs:
        lattice = load_lattice(spec, dim, unit_volume)
        constellations.append((spec, decoder.build_constellation(lattice, q)))

    step = 0
    for spec, constellation in constellations:
        for p, (K, vnr_db) in enumerate(grid):
            step += 1
            params = channel.ChannelParams.from_vnr(K, vnr_db, constellation.lattice)
            result = decoder.simulate_error_rate(constellation, params, trials, seed, first_trial=p * trials,
                                                 threads=threads, block_size=block_size)
            logger.info(f"({step}/{total}) {spec} K={K:g} VNR={vnr_db:g} dB: "
                        f"{result.errors}/{result.trials} errors")
            results.append((spec, K, vnr_db, result))
    return results


def cmd_sweep_vnr(parsed_args, settings):
    grid = [(parsed_args.K, vnr_db) for vnr_db in
            vnr_grid(parsed_args.vnr_start, parsed_args.vnr_stop, parsed_args.vnr_step)]
    trials = resolve(parsed_args.trials, settings, 'trials')
    results = _simulate(parsed_args.rotation, parsed_args.dim, parsed_args.q, grid, trials,
                        resolve(parsed_args.seed, settings, 'seed'), resolve(parsed_args.threads, settings, 'threads'),
                        resolve(None, settings, 'block size'), parsed_args.unit_volume)
    rows = [(spec, parsed_args.dim, parsed_args.q, K, vnr_db, r.trials, r.errors, r.error_rate, r.stderr)
            for spec, K, vnr_db, r in results]
    lattice_details.write_output(lattice_details.format_csv(lattice_details.SWEEP_VNR_HEADER, rows), parsed_args.out)
    return 0


def cmd_sweep_k(parsed_args, settings):
    grid = [(K, parsed_args.vnr) for K in parse_k_list(parsed_args.K_list)]
    trials = resolve(parsed_args.trials, settings, 'trials')
    results = _simulate(parsed_args.rotation, parsed_args.dim, parsed_args.q, grid, trials,
                        resolve(parsed_args.seed, settings, 'seed'), resolve(parsed_args.threads, settings, 'threads'),
                        resolve(None, settings, 'block size'), parsed_args.unit_volume)
    rows = [(spec, parsed_args.dim, parsed_args.q, vnr_db, K, r.trials, r.errors, r.error_rate, r.stderr)
            for spec, K, vnr_db, r in results]
    lattice_details.write_output(lattice_details.format_csv(lattice_details.SWEEP_K_HEADER, rows), parsed_args.out)
    return 0


def cmd_nonwr(parsed_args, settings):
    if parsed_args.method == 'quad' and parsed_args.dim != 2:
        raise UnsupportedOrder(f"--method quad is only available for --dim 2, got --dim {parsed_args.dim}")
    k_list = parse_k_list(parsed_args.K_list)
    w = rotations.sylvester_order(parsed_args.dim)
    trials = resolve(parsed_args.trials, settings, 'trials')
    seed = resolve(parsed_args.seed, settings, 'seed')
    threads = resolve(parsed_args.threads, settings, 'threads')

    rows = []
    for i, K in enumerate(k_list, start=1):
        if parsed_args.method == 'quad':
            estimate = analysis.nonwr_probability_quad(w, K)
            rows.append((parsed_args.dim, K, 'quad', 0, estimate, 0.0))
        else:
            estimate, stderr = analysis.nonwr_probability_mc(w, K, trials, seed, threads=threads)
            rows.append((parsed_args.dim, K, 'mc', trials, estimate, stderr))
        logger.info(f"({i}/{len(k_list)}) n={parsed_args.dim} K={K:g}: 1 - P{{C}} = {estimate:.6g}")
    lattice_details.write_output(lattice_details.format_csv(lattice_details.NONWR_HEADER, rows), parsed_args.out)
    return 0


def cmd_pep(parsed_args, settings):
    lattice = load_rotation_lattice(parsed_args.rotation, parsed_args.dim)
    sigma2 = channel.vnr_to_sigma2(parsed_args.vnr, lattice.volume, lattice.n)
    if parsed_args.bound is None:
        factor = float(settings.get('pep truncation factor'))
        bound = analysis.default_truncation_bound(lattice, factor)
    else:
        bound = parsed_args.bound

    if parsed_args.mode == 'approx':
        estimate = analysis.pep_bound_approx(lattice, parsed_args.K, sigma2, bound)
    else:
        estimate = analysis.pep_bound_mc(lattice, parsed_args.K, sigma2, bound,
                                         resolve(parsed_args.trials, settings, 'trials'),
                                         resolve(parsed_args.seed, settings, 'seed'),
                                         threads=resolve(parsed_args.threads, settings, 'threads'),
                                         block_size=resolve(None, settings, 'block size'))
    if not math.isfinite(estimate.value):
        raise NumericalFailure(f"PEP bound evaluated to {estimate.value}")
    logger.info(f"PEP {parsed_args.mode} for {parsed_args.rotation}: {estimate.value:.6g} over {estimate.terms} terms, "
                f"outermost shell {estimate.last_shell:.3g}")
    rows = [(parsed_args.rotation, parsed_args.dim, parsed_args.K, parsed_args.vnr, parsed_args.mode,
             estimate.truncation_bound, estimate.terms, estimate.value, estimate.stderr)]
    lattice_details.write_output(lattice_details.format_csv(lattice_details.PEP_HEADER, rows), parsed_args.out)
    return 0


def cmd_hadamard(parsed_args, settings):
    w = rotations.sylvester_order(parsed_args.order)
    rotation = rotations.to_rotation(w)
    rotations.save_rotation(rotation, parsed_args.out,
                            comment=f"Hadamard rotation W/sqrt({w.n}) from Sylvester's construction")
    logger.info(f"Wrote {rotation.name} to {parsed_args.out}")
    return 0


def cmd_write_config(parsed_args, settings):
    ConfigurationSettings().write_config(parsed_args.out)
    logger.info(f"Wrote default config to {parsed_args.out}")
    return 0


###############################################################################
# Argument parsing
###############################################################################
def build_parser():
    description = "Audits lattice codes and runs error-rate experiments over the Rician fading channel."
    audit_listing = '\n'.join(f" * {readable_name} - {description}" for readable_name, description, f in
                              sorted(get_lattice_audits().values()))
    epilog = f"""Here is a detailed list of the {len(get_lattice_audits().keys())} supported audits:\n{audit_listing}\n"""

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", help="Write all debug output to lattice_analyzer_debug_YYMMDD_HHMMSS.log",
                        action='store_true')
    common.add_argument("--quiet", help="Silence log output", action='store_true')
    common.add_argument("--config", help="Config file with run defaults (flags override it)")
    common.add_argument("--threads", help="Worker threads (results do not depend on this)", type=int)

    parser = argparse.ArgumentParser(prog='lattice_analyzer', description=description, epilog=epilog,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest='command', required=True)

    audit = subparsers.add_parser('audit', parents=[common], help="Report the figures of merit of a lattice")
    audit.add_argument("--lattice", "--rotation", dest='lattice', required=True,
                       help="identity, hadamard, bcc or the path of a generator matrix file")
    audit.add_argument("--dim", type=int, help="Dimension of the identity or hadamard lattice")
    audit.add_argument("--radius", type=float, help="Squared-norm radius of the local diversity check")
    audit.add_argument("--audit", help="Only run specified audits (repeat for multiple)",
                       choices=sorted(get_lattice_audits().keys()), action='append')
    audit.add_argument("--unit-volume", help="Scale the lattice to volume 1", action='store_true')
    audit.add_argument("--output-format", help="Report format, default='text'", default="text", type=str,
                       choices=['text', 'json'])
    audit.add_argument("--out", help="Write the report here instead of stdout")
    audit.set_defaults(func=cmd_audit)

    def add_simulation_args(sub):
        sub.add_argument("--rotation", "--lattice", dest='rotation', action='append', required=True,
                         help="identity, hadamard, bcc or a generator matrix file (repeat to compare)")
        sub.add_argument("--unit-volume", help="Scale every lattice to volume 1", action='store_true')
        sub.add_argument("--dim", type=int, required=True)
        sub.add_argument("--q", type=int, default=4, help="Points per dimension of the carved constellation")
        sub.add_argument("--trials", type=int)
        sub.add_argument("--seed", type=int)
        sub.add_argument("--out", help="CSV output file (default stdout)")

    sweep_vnr = subparsers.add_parser('sweep-vnr', parents=[common], help="Error rate as a function of VNR")
    add_simulation_args(sweep_vnr)
    sweep_vnr.add_argument("--K", type=float, required=True)
    sweep_vnr.add_argument("--vnr-start", type=float, required=True)
    sweep_vnr.add_argument("--vnr-stop", type=float, required=True)
    sweep_vnr.add_argument("--vnr-step", type=float, default=1.0)
    sweep_vnr.set_defaults(func=cmd_sweep_vnr)

    sweep_k = subparsers.add_parser('sweep-k', parents=[common], help="Error rate as a function of K")
    add_simulation_args(sweep_k)
    sweep_k.add_argument("--vnr", type=float, required=True)
    sweep_k.add_argument("--K-list", dest='K_list', required=True, help="Comma-separated Rician factors")
    sweep_k.set_defaults(func=cmd_sweep_k)

    nonwr = subparsers.add_parser('nonwr', parents=[common],
                                  help="Probability that a faded Hadamard lattice loses well-roundedness")
    nonwr.add_argument("--dim", type=int, required=True, help="Hadamard order (2, 4 or 8)")
    nonwr.add_argument("--K-list", dest='K_list', required=True, help="Comma-separated Rician factors")
    nonwr.add_argument("--method", choices=['mc', 'quad'], default='mc')
    nonwr.add_argument("--trials", type=int)
    nonwr.add_argument("--seed", type=int)
    nonwr.add_argument("--out", help="CSV output file (default stdout)")
    nonwr.set_defaults(func=cmd_nonwr)

    pep = subparsers.add_parser('pep', parents=[common], help="Truncated pairwise error probability bound")
    pep.add_argument("--rotation", "--lattice", dest='rotation', required=True)
    pep.add_argument("--dim", type=int, required=True)
    pep.add_argument("--K", type=float, required=True)
    pep.add_argument("--vnr", type=float, required=True)
    pep.add_argument("--bound", type=float, help="Truncation |t|^2 <= bound (default: factor * minimal norm)")
    pep.add_argument("--mode", choices=['mc', 'approx'], default='mc')
    pep.add_argument("--trials", type=int)
    pep.add_argument("--seed", type=int)
    pep.add_argument("--out", help="CSV output file (default stdout)")
    pep.set_defaults(func=cmd_pep)

    hadamard = subparsers.add_parser('hadamard', parents=[common], help="Write a Sylvester-Hadamard rotation file")
    hadamard.add_argument("--order", type=int, required=True, help="A power of two up to 4096")
    hadamard.add_argument("--out", required=True)
    hadamard.set_defaults(func=cmd_hadamard)

    write_config = subparsers.add_parser('write-config', parents=[common], help="Write the default config file")
    write_config.add_argument("--out", default=DEFAULT_CONFIGFILE,
                              help=f"Where to write the config (default is {DEFAULT_CONFIGFILE})")
    write_config.set_defaults(func=cmd_write_config)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        parsed_args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    configure_logging(parsed_args.debug, not parsed_args.quiet)
    logger.debug(f"Script launched with the following arguments {argv if argv is not None else sys.argv}")
    logger.debug(f"Execution began at {EXECUTION_START_TIME}")

    try:
        settings = ConfigurationSettings(parsed_args.config).get_config()
        if parsed_args.threads is not None and parsed_args.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {parsed_args.threads}")
        return parsed_args.func(parsed_args, settings)
    except UsageError as e:
        logger.debug(f"Usage error in {parsed_args.command}", exc_info=True)
        sys.stderr.write(f"lattice_analyzer {parsed_args.command}: error: {e}\n")
        return EXIT_USAGE
    except NumericalFailure as e:
        logger.debug(f"Numerical failure in {parsed_args.command}", exc_info=True)
        sys.stderr.write(f"lattice_analyzer {parsed_args.command}: numerical failure: {e}\n")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.debug(f"I/O error in {parsed_args.command}", exc_info=True)
        sys.stderr.write(f"lattice_analyzer {parsed_args.command}: error: {e}\n")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
