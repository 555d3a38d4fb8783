"""warsketch command line: stream, dist, attack, bench, gen.

Exit codes: 0 success, 1 usage, 2 parse, 3 parameter violation, 4 transport,
5 attack expectation not met.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import random
import sys
from pathlib import Path

from .dist import TransportError, dist_setup, run_protocol
from .harness import (
    SCENARIOS,
    GameOutcome,
    ObliviousRandom,
    SparseKeeper,
    StateInspector,
    TrialRecord,
    collision_bound,
    hybrid4_check,
    hybrid_modulus,
    run_game,
    syndrome_collision_attack,
)
from .pfhe import SECURE_MIN_DIMENSION, ParameterError, PfheParams, auto_modulus
from .stream import StreamState, TraceError, format_trace, parse_trace, random_trace, trace_vector

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PARAM, EXIT_TRANSPORT, EXIT_CHECK = range(6)

log = logging.getLogger("warsketch")


class UsageError(Exception):
    pass


class InputError(Exception):
    """Malformed input file (exit 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _modulus(text: str):
    if text == "auto":
        return None
    try:
        q = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if q < 2:
        raise argparse.ArgumentTypeError("q must be at least 2")
    return q


def seed_bytes(text: str) -> bytes:
    return hashlib.sha256(b"warsketch-seed:" + text.encode()).digest()


def _config_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("parameters")
    g.add_argument("--n", type=int, default=1024, help="dimension (default 1024)")
    g.add_argument("--k", type=int, default=4, help="sparsity (default 4)")
    g.add_argument("--N", type=int, default=None, help="entry bound (default 100; attacks pick one)")
    g.add_argument("--g", type=int, default=2, help="lattice dimension (default 2, toy)")
    g.add_argument("--q", type=_modulus, default=None, metavar="Q|auto", help="modulus (default auto)")
    g.add_argument("--sigma", type=float, default=1.0, help="noise width (default 1.0)")
    g.add_argument("--seed", default="0", help="seed string, expanded with SHA-256")
    g.add_argument("--naive", action="store_true", help="naive O(k) syndrome updates")
    g.add_argument("--memo", type=int, default=0, metavar="SIZE", help="memoize SIZE point circuits")
    g.add_argument("--secure", action="store_true", help=f"refuse toy parameters (needs g >= {SECURE_MIN_DIMENSION})")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _config_parser()
    parser = _Parser(prog="warsketch", description="Robust k-sparse recovery sketches.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stream", parents=[common], help="run a trace file, printing a report per Q")
    s.add_argument("trace", help="trace file ('-' for stdin)")

    d = sub.add_parser("dist", parents=[common], help="coordinator protocol over partition files")
    d.add_argument("parts", nargs="+", help="one trace file per server")
    d.add_argument("--transport", choices=("inprocess", "socket"), default="inprocess")
    d.add_argument("--port", type=int, default=0, help="coordinator port for --transport socket")

    a = sub.add_parser("attack", parents=[common], help="adversarial scenarios, JSON lines per trial")
    a.add_argument("scenario", choices=SCENARIOS)
    a.add_argument("--trials", type=int, default=10)
    a.add_argument("--rounds", type=int, default=100, help="rounds per game")
    a.add_argument("--figures", type=Path, metavar="DIR", help="write PNG figures to DIR")

    b = sub.add_parser("bench", parents=[common], help="op-count table (tab separated)")
    b.add_argument("--figures", type=Path, metavar="DIR", help="write PNG figures to DIR")

    gen = sub.add_parser("gen", parents=[common], help="random trace generator")
    gen.add_argument("--support", type=int, default=None, help="final support size (default k)")
    gen.add_argument("--length", type=int, default=100, help="number of updates")
    gen.add_argument("--queries", type=int, default=1)
    gen.add_argument("-o", "--output", type=Path, help="write here instead of stdout")
    return parser


def make_params(args, N: int) -> PfheParams:
    if args.n < 1 or args.k < 1 or N < 1 or args.g < 1:
        raise ParameterError("n, k, N and g must be positive")
    if args.secure and args.g < SECURE_MIN_DIMENSION:
        raise ParameterError(f"--secure needs g >= {SECURE_MIN_DIMENSION}, got g={args.g}")
    if not args.secure:
        log.info("toy parameters (g=%d): not secure", args.g)
    q = args.q or auto_modulus(args.n, args.k, N, args.g, args.sigma)
    return PfheParams.create(args.n, args.g, q, args.sigma)


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _read_trace(path: str, n: int) -> list[tuple]:
    try:
        return list(parse_trace(_read_lines(path), n))
    except TraceError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_stream(args, out) -> int:
    N = args.N or 100
    pf = make_params(args, N)
    records = _read_trace(args.trace, args.n)
    state = StreamState.setup(
        args.n, args.k, N, pf, seed_bytes(args.seed), batched=not args.naive, cache_size=args.memo
    )
    for rec in records:
        if rec[0] == "U":
            state.update(rec[1], rec[2])
        else:
            print(state.report().format(), file=out)
    return EXIT_OK


def cmd_dist(args, out) -> int:
    N = args.N or 100
    pf = make_params(args, N)
    parts = [trace_vector(_read_trace(path, args.n), args.n) for path in args.parts]
    zeta = dist_setup(args.n, args.k, N, pf, seed_bytes(args.seed))
    run = run_protocol(parts, zeta, args.transport, port=args.port)
    print(run.result.format(), file=out)
    for t, ops in sorted(run.server_ops.items()):
        print(
            f"server {t}: nonzeros={ops.nonzeros} ct_mults={ops.ct_mults} field_mults={ops.field_mults}",
            file=sys.stderr,
        )
    return EXIT_OK


_GAMES = {"oblivious": ObliviousRandom, "sparse": SparseKeeper, "inspector": StateInspector}


def cmd_attack(args, out) -> int:
    scen = args.scenario
    seed = seed_bytes(args.seed)
    if scen in _GAMES:
        N = args.N or 100
        pf = make_params(args, N)
        total = GameOutcome()
        for t in range(args.trials):
            tseed = hashlib.sha256(seed + t.to_bytes(8, "little")).digest()
            adv = _GAMES[scen](args.n, args.k, N, seed=int.from_bytes(tseed[:8], "little"))
            res = run_game(adv, args.n, args.k, N, args.rounds, tseed, pfhe=pf, keep_transcript=False)
            total.merge(res)
            total.trials.append(TrialRecord(t, scen, res.rejections > 0, res.rounds, res.incorrect_responses))
        ok = total.incorrect_responses == 0
    elif scen.startswith("collision"):
        N = args.N or collision_bound(args.n)
        pf = make_params(args, N)
        total = syndrome_collision_attack(
            args.n, args.k, N, pf, seed, trials=args.trials, verify=scen == "collision", cache_size=args.memo
        )
        live = [r for r in total.trials if not r.skipped]
        if scen == "collision":
            ok = total.incorrect_responses == 0
        else:
            ok = any(r.incorrect for r in live)
    else:
        N = args.N or collision_bound(args.n)
        if args.q is None:
            args.q = hybrid_modulus(args.n, args.k, N, args.g, args.sigma)
        pf = make_params(args, N)
        rep = hybrid4_check(args.n, args.k, N, pf, args.trials, seed)
        total = GameOutcome()
        for tr in rep.trials:
            note = "m in supp(v)" if tr.in_support else "m outside supp(v), logged only"
            total.trials.append(
                TrialRecord(tr.trial, scen, tr.rejected, 1, int(tr.hash_equals_sketch and tr.in_support), note=note)
            )
        ok = rep.collisions == 0 and rep.decode_mismatches == 0 and rep.identical_accepted == rep.identical_trials
    for rec in total.trials:
        print(rec.to_json(), file=out)
    if args.figures:
        from .plotting import attack_outcomes

        path = attack_outcomes(total.trials, args.figures, scen)
        log.info("wrote %s", path)
    if total.truncated:
        log.warning("round budget exceeded; games truncated")
    if not ok:
        print(f"attack check failed for scenario {scen}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_bench(args, out) -> int:
    from .bench import BENCH_HEADER, run_bench, scaling_sweep

    N = args.N or 100
    make_params(args, N)  # validation only
    rows, costs = run_bench(args.n, args.k, N, args.g, args.q, seed_bytes(args.seed))
    print("\t".join(BENCH_HEADER), file=out)
    for r in rows:
        print("\t".join(r.fields()), file=out)
    if args.figures:
        from .plotting import syndrome_scaling, update_cost

        for path in (syndrome_scaling(costs, args.figures), update_cost(scaling_sweep(g=args.g), args.figures)):
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    N = args.N or 100
    support = args.k if args.support is None else args.support
    if args.n < 1 or not 0 <= support <= args.n:
        raise ParameterError(f"support {support} outside [0, {args.n}]")
    rng = random.Random(seed_bytes(args.seed))
    text = format_trace(random_trace(args.n, support, N, args.length, rng, args.queries))
    if args.output:
        args.output.write_text(text)
    else:
        out.write(text)
    return EXIT_OK


COMMANDS = {"stream": cmd_stream, "dist": cmd_dist, "attack": cmd_attack, "bench": cmd_bench, "gen": cmd_gen}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"warsketch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"warsketch: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ParameterError as exc:
        print(f"warsketch: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except TransportError as exc:
        print(f"warsketch: transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
