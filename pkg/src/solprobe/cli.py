"""Command-line front end.

    solprobe ball            --config exp.ini --out DIR
    solprobe ac-probe        --config exp.ini --out DIR
    solprobe depth-probe     --config exp.ini --out DIR
    solprobe valuation-check --config exp.ini --out DIR
    solprobe lemma-check     --config exp.ini --out DIR
    solprobe quarter-fit     --config exp.ini --out DIR
    solprobe decompose-check --config exp.ini --out DIR

Exit codes: 0 success, 2 usage or configuration error, 3 memory budget
hit (partial ball written), 4 probe failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import random
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, describe_schema, load_config, parse_module
from .goodgen import (DecompositionError, decompose, fit_F_prime, good_gen_set_for,
                      good_gen_set_z16, sample_fuzz_box)
from .groups import SixthGroup
from .metric import (BudgetExceeded, LowerBound, enumerate_ball, load_ball, save_ball)
from .probes import (WitnessConfig, ac_probe, deep_pocket_probe, default_J, fit_lemma_D,
                     quarter_bound_fit, random_lemma_word, triangle_lemma_check)
from .valuations import check_axioms, format_real, pair_for

log = logging.getLogger("solprobe")

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_PROBE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _header(cmd: str, cfg: ExperimentConfig, radius, seed) -> str:
    lines = [f"# solprobe {__version__}",
             f"# command: {cmd}",
             f"# family: {cfg.family}",
             f"# radius: {radius if radius is not None else 'none'}",
             f"# seed: {seed if seed is not None else 'none'}",
             "# config:"]
    for line in cfg.text.splitlines():
        lines.append(f"#   {line}" if line.strip() else "#")
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: str, columns: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if x is None else x for x in row])
    path.write_bytes(buf.getvalue().encode())


def _real(x) -> str:
    return format_real(x) if x is not None else "ABSENT"


def _ball_path(cfg: ExperimentConfig, out: Path) -> Path:
    return out / cfg.get("ball", "file", "ball.spb")


def _load_table(cfg: ExperimentConfig, out: Path, group, gens):
    path = _ball_path(cfg, out)
    if not path.exists():
        raise UsageError(f"no ball file at {path}; run 'solprobe ball' with this config first")
    table = load_ball(path)
    if table.group != group or table.gens != gens:
        raise UsageError(f"{path} was built for a different group or generating set; "
                         "rerun 'solprobe ball' with this config")
    return table


# -- commands ----------------------------------------------------------------------


def cmd_ball(cfg: ExperimentConfig, out: Path, workers: int, mem_bytes: int) -> int:
    group = cfg.group()
    gens = cfg.gens(group)
    R = cfg.radius()
    if R < 0:
        raise ConfigError("[ball] radius must be non-negative")
    status = EXIT_OK
    try:
        table = enumerate_ball(gens, R, mem_bytes=mem_bytes, workers=workers)
    except BudgetExceeded as exc:
        log.warning("%s; keeping radius %d", exc, exc.radius)
        table = exc.table
        status = EXIT_BUDGET
    save_ball(table, _ball_path(cfg, out))
    header = _header("ball", cfg, table.radius, None)
    rows = []
    total = 0
    for r, n in enumerate(table.sphere_sizes()):
        total += n
        rows.append((r, n, total))
    _write_csv(out / "spheres.csv", header, ["radius", "sphere_size", "ball_size"], rows)
    return status


def cmd_ac_probe(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    gens = cfg.gens(group)
    table = _load_table(cfg, out, group, gens)
    vp = pair_for(group)
    raw_a = cfg.get("ac-probe", "a")
    a = parse_module(group, raw_a) if raw_a else group.default_a()
    raw_J = cfg.get("ac-probe", "J", "1")
    if raw_J == "auto":
        F = cfg.get_float("ac-probe", "F")
        if F is None:
            F = quarter_bound_fit(gens, vp, table).F
        a_len = table.word_length(group.embed(a))
        if a_len is None:
            raise UsageError("a lies outside the ball; cannot choose J automatically")
        J = default_J(F, a_len, gens.z, vp.eval1(a), vp.C)
    else:
        try:
            J = int(raw_J)
        except ValueError:
            raise ConfigError(f"[ac-probe] J must be an integer or 'auto', got {raw_J!r}") from None
    n_min = cfg.get_int("ac-probe", "n_min", J)
    n_max = cfg.get_int("ac-probe", "n_max", 3)
    wcfg = WitnessConfig.for_gens(gens, a=a, J=J, n_range=range(max(n_min, J), n_max + 1))
    rows = ac_probe(gens, wcfg, table)
    header = _header("ac-probe", cfg, table.radius, None)
    cols = ["n", "J", "a", "len_h_plus", "len_h_minus", "len_s2J", "detour", "length_bound", "status"]
    out_rows = []
    for r in rows:
        status = "ok" if r.detour is not None else "ABSENT"
        out_rows.append((r.n, J, str(a), _real(r.len_plus), _real(r.len_minus), _real(r.len_s2J),
                         _real(r.detour), _real(r.bound), status))
    _write_csv(out / "ac_probe.csv", header, cols, out_rows)
    return EXIT_OK


def cmd_depth_probe(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    gens = cfg.gens(group)
    try:
        ggs = good_gen_set_for(group)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if gens.name != "good-gen-set":
        raise ConfigError("depth-probe needs [gens] kind = good-gen-set")
    table = _load_table(cfg, out, group, gens)
    raw_a = cfg.get("depth-probe", "a")
    a = parse_module(group, raw_a) if raw_a else ggs.nonzero()[0]
    i_min = cfg.get_int("depth-probe", "i_min", 0)
    i_max = cfg.get_int("depth-probe", "i_max", 4)
    rows = deep_pocket_probe(ggs, table, range(i_min, i_max + 1), a=a,
                             H=cfg.get_float("depth-probe", "H", 0.0),
                             max_steps=cfg.get_int("depth-probe", "max_steps"))
    header = _header("depth-probe", cfg, table.radius, None)
    cols = ["i", "a", "length", "depth", "depth_kind", "valuation_bound"]
    out_rows = []
    for r in rows:
        if r.depth is None:
            d, kind = "ABSENT", "absent"
        elif isinstance(r.depth, LowerBound):
            d, kind = r.depth.value, "lower_bound"
        else:
            d, kind = r.depth, "exact"
        out_rows.append((r.i, str(a), _real(r.length), d, kind, format_real(r.valuation_bound)))
    _write_csv(out / "depth_probe.csv", header, cols, out_rows)
    return EXIT_OK


def cmd_valuation_check(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    vp = pair_for(group)
    samples = cfg.get_int("valuation-check", "samples", 10000)
    seed = cfg.get_int("valuation-check", "seed", 0)
    tol = cfg.get_float("valuation-check", "tol", 0.0 if vp.exact else 1e-9)
    report = check_axioms(vp, group, samples, tol=tol, seed=seed)
    header = _header("valuation-check", cfg, None, seed)
    cols = ["pair", "axiom", "samples", "max_violation", "tol", "seed", "pass"]
    rows = [(vp.name, r.axiom, r.samples, format_real(r.max_violation), format_real(tol), seed,
             "pass" if r.passed else "fail") for r in report.rows]
    _write_csv(out / "valuation_check.csv", header, cols, rows)
    return EXIT_OK if report.passed else EXIT_PROBE


def cmd_lemma_check(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    gens = cfg.gens(group)
    vp = pair_for(group)
    samples = cfg.get_int("lemma-check", "samples", 1000)
    max_length = cfg.get_int("lemma-check", "max_length", 30)
    seed = cfg.get_int("lemma-check", "seed", 0)
    side = cfg.get_int("lemma-check", "side", 1)
    if side not in (1, -1):
        raise ConfigError("[lemma-check] side must be 1 or -1")
    rng = random.Random(seed)
    fit_words = [random_lemma_word(gens, rng, max_length, side) for _ in range(samples)]
    test_words = [random_lemma_word(gens, rng, max_length, side) for _ in range(samples)]
    D = cfg.get_int("lemma-check", "D")
    if D is None:
        D = fit_lemma_D(gens, vp, fit_words, side)
    header = _header("lemma-check", cfg, None, seed)
    cols = ["phase", "index", "seed", "side", "length", "terms", "value", "needed_D", "D", "p", "pass"]
    rows = []
    failures = 0
    for phase, words in (("fit", fit_words), ("test", test_words)):
        for idx, w in enumerate(words):
            res = triangle_lemma_check(gens, vp, w, D, side)
            if phase == "test" and not res.passed:
                failures += 1
            rows.append((phase, idx, seed, side, len(w), res.terms, format_real(res.value),
                         format_real(res.needed_D), D, "" if res.p is None else res.p,
                         "pass" if res.passed else "fail"))
    _write_csv(out / "lemma_check.csv", header, cols, rows)
    return EXIT_OK if failures == 0 else EXIT_PROBE


def cmd_quarter_fit(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    gens = cfg.gens(group)
    table = _load_table(cfg, out, group, gens)
    fit = quarter_bound_fit(gens, pair_for(group), table)
    header = _header("quarter-fit", cfg, table.radius, None)
    cols = ["radius", "slab_count", "max_excess", "running_F", "z"]
    rows = []
    running = float("-inf")
    for r in fit.rows:
        running = max(running, r.max_excess)
        rows.append((r.r, r.slab_count, format_real(r.max_excess), format_real(running), format_real(fit.z)))
    _write_csv(out / "quarter_fit.csv", header, cols, rows)
    return EXIT_OK


def cmd_decompose_check(cfg, out, workers, mem_bytes) -> int:
    group = cfg.group()
    if not isinstance(group, SixthGroup):
        raise ConfigError("decompose-check is implemented for family z16 only")
    samples = cfg.get_int("decompose-check", "samples", 1000)
    seed = cfg.get_int("decompose-check", "seed", 0)
    ggs, chain = good_gen_set_z16(F=cfg.get_float("decompose-check", "F"))
    rng = random.Random(seed)
    fit_ks = [sample_fuzz_box(ggs, rng) for _ in range(samples)]
    test_ks = [sample_fuzz_box(ggs, rng) for _ in range(samples)]
    ggs.F_prime = fit_F_prime(ggs, chain, fit_ks)
    header = _header("decompose-check", cfg, None, seed)
    cols = ["phase", "index", "seed", "k", "I1", "I2", "digits", "leftover", "required_F_prime",
            "F", "F_prime", "pass"]
    rows = []
    failures = 0
    for phase, ks in (("fit", fit_ks), ("test", test_ks)):
        for idx, k in enumerate(ks):
            try:
                dec = decompose(ggs, chain, k)
                digits = " ".join(f"{i}:{a}" for i, a in sorted(dec.digits.items()) if a)
                left = " ".join(f"{i}:{a}" for i, a in dec.leftover)
                rows.append((phase, idx, seed, str(k), -k.e2, -k.e3, digits, left,
                             dec.required_F_prime(), format_real(ggs.F), ggs.F_prime, "pass"))
            except DecompositionError:
                failures += 1
                rows.append((phase, idx, seed, str(k), -k.e2, -k.e3, "", "", "",
                             format_real(ggs.F), ggs.F_prime, "fail"))
    _write_csv(out / "decompose_check.csv", header, cols, rows)
    return EXIT_OK if failures == 0 else EXIT_PROBE


COMMANDS = {
    "ball": cmd_ball,
    "ac-probe": cmd_ac_probe,
    "depth-probe": cmd_depth_probe,
    "valuation-check": cmd_valuation_check,
    "lemma-check": cmd_lemma_check,
    "quarter-fit": cmd_quarter_fit,
    "decompose-check": cmd_decompose_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solprobe", description=__doc__.split("\n\n")[0],
                                epilog="config keys:\n" + describe_schema(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"solprobe {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path, help="experiment config file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes for ball enumeration")
    p.add_argument("--mem-gib", type=float, default=2.0, help="memory budget for the ball (GiB)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("solprobe: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config.read_text())
    except OSError as exc:
        print(f"solprobe: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"solprobe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.out.mkdir(parents=True, exist_ok=True)
    mem_bytes = int(args.mem_gib * 1024**3)
    try:
        return COMMANDS[args.command](cfg, args.out, args.workers, mem_bytes)
    except (ConfigError, UsageError) as exc:
        print(f"solprobe: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
