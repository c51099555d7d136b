"""Command line interface.

    slemma validate <file>
    slemma classify <file> [--seed S] [--samples N] [--box R] [--tol T]
    slemma certificate <file> [--method p1|supergradient|separation]
    slemma counterexample <file>
    slemma geometry <file> [--export cloud.txt]
    slemma farkas <file>
    slemma conjecture-scan --count C --dim n --seed S
    slemma verify <file> --alpha a1,...,ap

Exit codes: 0 definitive verdict or clean report, 2 undetermined,
1 usage or I/O error, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import certificate as cert_mod
from . import farkas as farkas_mod
from . import geometry, report
from .errors import NotConverged, NumericalBreakdown, SlemmaError
from .implication import (UNDETERMINED, ClassifyConfig,
                          classify_instance, find_counterexample)
from .problem import ParseError, load_problem
from .report import Report, fnum, fvec
from .rng import derive_seed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNDETERMINED = 2
EXIT_NUMERICAL = 3


def _config_from(pf, args):
    """File config overridden by the command line flags that were given."""
    cfg = ClassifyConfig()
    file_cfg = pf.config
    if "R" in file_cfg:
        cfg.box_radius = float(file_cfg["R"])
    if "N" in file_cfg:
        cfg.samples = int(file_cfg["N"])
    if "seed" in file_cfg:
        cfg.seed = int(file_cfg["seed"])
    if "tol" in file_cfg:
        cfg.psd_tol = float(file_cfg["tol"])
        cfg.lp_tol = float(file_cfg["tol"])
    if "eta" in file_cfg:
        cfg.eta = float(file_cfg["eta"])
    if getattr(args, "box", None) is not None:
        cfg.box_radius = args.box
    if getattr(args, "samples", None) is not None:
        cfg.samples = args.samples
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "tol", None) is not None:
        cfg.psd_tol = args.tol
        cfg.lp_tol = args.tol
    return cfg


def _echo_command(args, pf, cfg):
    parts = ["slemma", args.command, pf.path or "<file>"]
    if args.command == "classify":
        parts += ["--seed", str(cfg.seed), "--samples", str(cfg.samples),
                  "--box", fnum(cfg.box_radius), "--tol", fnum(cfg.psd_tol)]
    return " ".join(parts)


def cmd_validate(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    rep = Report("problem file")
    report.describe_instance(rep, pf, system)
    rep.add("all_linear", str(pf.all_linear).lower())
    for idx, entry in enumerate(pf.entries):
        kind = next(iter(entry))
        block = rep.add_block(f"f{idx}")
        block.add("kind", kind)
        if kind == "expr":
            block.add("source", entry["expr"])
        elif kind == "quadratic":
            block.add("Q", fvec(entry["quadratic"]["Q"]))
            block.add("c", fvec(entry["quadratic"]["c"]))
            block.add("d", fnum(entry["quadratic"]["d"]))
        else:
            block.add("a", fvec(entry["linear"]["a"]))
            block.add("b", fnum(entry["linear"]["b"]))
    if pf.config:
        cfg_block = rep.add_block("config")
        for key in sorted(pf.config):
            value = pf.config[key]
            cfg_block.add(key, fnum(value) if isinstance(value, float) else value)
    out.write(rep.render(args.json))
    return EXIT_OK


def cmd_classify(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    cfg = _config_from(pf, args)
    result = classify_instance(system, cfg)
    command = _echo_command(args, pf, cfg)
    rep = report.classify_report(pf, system, result, command)
    out.write(rep.render(args.json))
    if result.verdict == UNDETERMINED:
        return EXIT_UNDETERMINED
    return EXIT_OK


def cmd_certificate(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    cfg = _config_from(pf, args)
    rep = Report("certificate search")
    rep.add("command", _echo_command(args, pf, cfg))
    report.describe_instance(rep, pf, system)
    rep.add("method", args.method)

    cert = None
    detail = {}
    if args.method == "p1":
        search = cert_mod.find_certificate_p1(system, alpha_max=cfg.alpha_max,
                                              tol=cfg.psd_tol)
        cert = search.certificate
        detail = {"best_alpha": search.best_alpha,
                  "best_lambda_min": search.best_lambda_min,
                  "at_boundary": search.at_boundary}
    elif args.method == "supergradient":
        search = cert_mod.find_certificate_general(
            system, iters=cfg.supergradient_iters,
            seed=derive_seed(cfg.seed, 4), tol=cfg.psd_tol)
        cert = search.certificate
        detail = {"best_alpha": search.best_alpha,
                  "best_lambda_min": search.best_lambda_min}
    else:
        cloud = geometry.sample_image(system, cfg.box_radius,
                                      cfg.cloud_samples,
                                      derive_seed(cfg.seed, 9))
        search = cert_mod.find_certificate_via_separation(
            system, cloud, tol=cfg.lp_tol, seed=derive_seed(cfg.seed, 10),
            rounds=cfg.refine_rounds)
        cert = search.certificate
        detail = {"outcome": search.outcome, "rounds": search.rounds}
        if search.alpha0 is not None:
            detail["alpha0"] = search.alpha0

    report.certificate_block(rep, cert)
    for key, value in detail.items():
        if value is None:
            continue
        if isinstance(value, np.ndarray):
            rep.add(key, fvec(value))
        elif isinstance(value, float):
            rep.add(key, fnum(value))
        else:
            rep.add(key, value)
    if args.save and cert is not None:
        with open(args.save, "w", encoding="utf-8") as handle:
            handle.write(cert_mod.format_certificate(cert))
        rep.add("saved", args.save)
    out.write(rep.render(args.json))
    return EXIT_OK if cert is not None else EXIT_UNDETERMINED


def cmd_counterexample(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    cfg = _config_from(pf, args)
    result = find_counterexample(system, radius=cfg.box_radius,
                                 samples=cfg.samples,
                                 seed=derive_seed(cfg.seed, 2),
                                 penalty=cfg.penalty)
    rep = Report("counterexample search")
    rep.add("command", _echo_command(args, pf, cfg))
    report.describe_instance(rep, pf, system)
    report.counterexample_block(rep, result)
    out.write(rep.render(args.json))
    return EXIT_OK if result.found else EXIT_UNDETERMINED


def cmd_geometry(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    cfg = _config_from(pf, args)
    cloud = geometry.sample_image(system, cfg.box_radius, cfg.cloud_samples,
                                  derive_seed(cfg.seed, 9))
    rep = Report("image-set geometry")
    rep.add("command", _echo_command(args, pf, cfg))
    report.describe_instance(rep, pf, system)
    cloud_block = rep.add_block("cloud")
    cloud_block.add("size", cloud.size)
    cloud_block.add("box_radius", fnum(cloud.box_radius))
    cloud_block.add("seed", cloud.seed)
    cloud_block.add("skipped", cloud.skipped)
    rep.add("image_points_in_k", int(len(geometry.cloud_k_members(cloud))))
    report.hull_block(rep, geometry.hull_intersects_k(cloud, tol=cfg.lp_tol))
    report.separator_block(rep,
                           geometry.extract_separator(cloud, tol=cfg.lp_tol))

    identity = geometry.identity_membership_oracle(
        system, cloud, budget=cfg.member_budget, seed=derive_seed(cfg.seed, 11))
    report.falsify_block(
        rep,
        geometry.falsify_convexity(identity, cloud, trials=cfg.falsify_trials,
                                   seed=derive_seed(cfg.seed, 12), eta=cfg.eta,
                                   system=system, budget=cfg.member_budget),
        "image_convexity_falsifier")
    epi = geometry.epi_membership_oracle(
        system, cloud, budget=cfg.member_budget, seed=derive_seed(cfg.seed, 5))
    report.falsify_block(
        rep,
        geometry.falsify_convexity(epi, cloud, trials=cfg.falsify_trials,
                                   seed=derive_seed(cfg.seed, 6), eta=cfg.eta,
                                   system=system, budget=cfg.member_budget),
        "epi_convexity_falsifier")
    conical = geometry.conical_membership_oracle(
        system, cloud, budget=cfg.member_budget, seed=derive_seed(cfg.seed, 7),
        convexifier=geometry.ZERO_SET)
    report.falsify_block(
        rep,
        geometry.falsify_convexity(conical, cloud,
                                   trials=max(1, cfg.falsify_trials // 10),
                                   seed=derive_seed(cfg.seed, 8), eta=cfg.eta,
                                   system=system, budget=cfg.member_budget),
        "conical_convexity_falsifier")
    if args.export:
        geometry.export_cloud(cloud, args.export)
        rep.add("exported", args.export)
    out.write(rep.render(args.json))
    return EXIT_OK


def cmd_farkas(args, out):
    pf = load_problem(args.file)
    data = pf.linear_data()
    result = (farkas_mod.farkas_homogeneous(data)
              if data.mode == farkas_mod.HOMOGENEOUS
              else farkas_mod.farkas_affine(data))
    residuals = farkas_mod.verify_farkas(data, result)
    cfg = _config_from(pf, args)
    rep = report.farkas_report(pf, data, result, residuals,
                               _echo_command(args, pf, cfg))
    out.write(rep.render(args.json))
    return EXIT_OK if result.kind != farkas_mod.INCONSISTENT else \
        EXIT_UNDETERMINED


def cmd_conjecture_scan(args, out):
    scan = geometry.conjecture_scan(args.count, args.dim, args.seed)
    command = (f"slemma conjecture-scan --count {args.count} "
               f"--dim {args.dim} --seed {args.seed}")
    rep = report.conjecture_report(scan, command)
    out.write(rep.render(args.json))
    return EXIT_OK


def cmd_verify(args, out):
    pf = load_problem(args.file)
    system = pf.system()
    cfg = _config_from(pf, args)
    if args.alpha is None and args.certificate is None:
        raise ParseError("verify needs --alpha or --certificate")
    if args.alpha is not None:
        try:
            alpha = np.array([float(v) for v in args.alpha.split(",")]) \
                if args.alpha.strip() else np.zeros(0)
        except ValueError:
            raise ParseError(f"--alpha expects comma-separated numbers, "
                             f"got {args.alpha!r}") from None
        source = f"--alpha {args.alpha}"
    else:
        try:
            with open(args.certificate, encoding="utf-8") as handle:
                alpha = cert_mod.parse_certificate(handle.read()).alpha
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        source = f"--certificate {args.certificate}"
    if alpha.shape[0] != system.p:
        raise ParseError(f"certificate has {alpha.shape[0]} entries, "
                         f"system has p={system.p}")
    rep = Report("certificate verification")
    rep.add("command", f"slemma verify {pf.path} {source}")
    report.describe_instance(rep, pf, system)
    rep.add("alpha", fvec(alpha))
    if system.is_quadratic:
        ver = cert_mod.verify_certificate_quadratic(system, alpha,
                                                    tol=cfg.psd_tol)
        rep.add("verdict", "Valid" if ver.valid else "Invalid")
        rep.add("lambda_min", fnum(ver.lambda_min))
        if not ver.valid:
            if ver.violating_x is not None:
                rep.add("violating_x", fvec(ver.violating_x))
            else:
                rep.add("violating_direction",
                        fvec(ver.homogeneous_direction))
    else:
        ver = cert_mod.verify_certificate_sampled(
            system, alpha, radius=cfg.box_radius, samples=cfg.samples,
            seed=derive_seed(cfg.seed, 13))
        rep.add("verdict", "Violated" if ver.violated else
                "NoViolation (sampled only)")
        rep.add("min_observed", fnum(ver.value))
        if ver.violated:
            rep.add("x", fvec(ver.x))
    out.write(rep.render(args.json))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slemma",
        description="S-procedure verification toolkit: certificates, "
                    "counterexamples, and image-set geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_search_flags=False):
        p.add_argument("--json", action="store_true",
                       help="machine-readable report")
        if with_search_flags:
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--samples", type=int, default=None)
            p.add_argument("--box", type=float, default=None)
            p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("validate", help="parse and report the instance")
    p.add_argument("file")
    add_common(p)

    p = sub.add_parser("classify", help="full instance classification")
    p.add_argument("file")
    add_common(p, with_search_flags=True)

    p = sub.add_parser("certificate", help="certificate search only")
    p.add_argument("file")
    p.add_argument("--method", choices=["p1", "supergradient", "separation"],
                   default="p1")
    p.add_argument("--save", default=None, metavar="cert.txt",
                   help="write the found certificate in its text form")
    add_common(p, with_search_flags=True)

    p = sub.add_parser("counterexample", help="counterexample search only")
    p.add_argument("file")
    add_common(p, with_search_flags=True)

    p = sub.add_parser("geometry",
                       help="cloud, cone and hull tests, falsifiers")
    p.add_argument("file")
    p.add_argument("--export", default=None, metavar="cloud.txt")
    add_common(p, with_search_flags=True)

    p = sub.add_parser("farkas", help="linear alternatives")
    p.add_argument("file")
    add_common(p)

    p = sub.add_parser("conjecture-scan",
                       help="scan random quadratic triples for non-convex "
                            "upper sets")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    add_common(p)

    p = sub.add_parser("verify", help="verify a user-supplied certificate")
    p.add_argument("file")
    p.add_argument("--alpha", default=None,
                   help="comma-separated multipliers a1,...,ap")
    p.add_argument("--certificate", default=None, metavar="cert.txt",
                   help="read the multipliers from a saved certificate")
    add_common(p, with_search_flags=True)
    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "certificate": cmd_certificate,
    "counterexample": cmd_counterexample,
    "geometry": cmd_geometry,
    "farkas": cmd_farkas,
    "conjecture-scan": cmd_conjecture_scan,
    "verify": cmd_verify,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _HANDLERS[args.command](args, out)
    except (ParseError, FileNotFoundError, IsADirectoryError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NumericalBreakdown, NotConverged) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except SlemmaError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
