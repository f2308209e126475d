"""``morreyseq`` command line.

Exit codes: 0 success, 2 I/O or schema error, 3 domain error, 4 solver
did not converge.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import seqio
from .duality import predual_bounds
from .embeddings import (EmbeddingCase, embedding_admissible, embedding_norm_bruteforce,
                         embedding_norm_closed_form, separation_distance, separation_family,
                         separation_norm_bound, witness_ratio_blowup, witness_u_decrease)
from .entropy import entropy_morrey_sandwich, entropy_profile, entropy_schuett, lp, morrey
from .spaces import (SpaceParams, attaining_cube, equiv_norm_arbitrary, linf_norm, lorentz_quasinorm,
                     lp_norm, morrey_norm, predual_level_norm)

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_SOLVER = 0, 2, 3, 4


class NonConvergence(RuntimeError):
    pass


def fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return "%.17g" % x


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        num, _, den = t.partition("/")
        return float(num) / float(den) if den else float(num)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}") from None


def _k_range(text: str) -> list[int]:
    try:
        a, _, b = text.partition(":")
        lo, hi = int(a), int(b or a)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or K1:K2, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("k range must satisfy 1 <= K1 <= K2")
    return list(range(lo, hi + 1))


# ---------------------------------------------------------------------------
# commands


def cmd_norm(args, out) -> int:
    seq = seqio.load(args.file)
    params = SpaceParams(args.u, args.p)
    v = args.variant
    if v == "dyadic":
        out.write(fmt(morrey_norm(seq, params)) + "\n")
        if params.p < params.u:
            try:
                out.write(f"attained on {attaining_cube(seq, params)}\n")
            except ValueError:
                pass
    elif v in ("arb1", "arb2"):
        out.write(fmt(equiv_norm_arbitrary(seq, params, int(v[-1]))) + "\n")
    elif v == "lorentz":
        out.write(fmt(lorentz_quasinorm(seq, params.u)) + "\n")
    elif v == "lp":
        out.write(fmt(lp_norm(seq, params.p)) + "\n")
    elif v == "linf":
        out.write(fmt(linf_norm(seq)) + "\n")
    else:
        if args.j is None:
            raise ValueError("predual-level requires --j")
        out.write(fmt(predual_level_norm(seq, params, args.j)) + "\n")
    return EXIT_OK


def cmd_predual(args, out) -> int:
    seq = seqio.load(args.file)
    params = SpaceParams(args.u, args.p)
    lower, upper = predual_bounds(seq, params, args.jmax, max_iter=args.max_iter)
    out.write(f"lower\t{fmt(lower.value)}\n")
    out.write(f"upper\t{fmt(upper.value)}\n")
    out.write(f"iterations\t{upper.iterations}\n")
    if not upper.converged:
        raise NonConvergence(f"subgradient solver stopped after {upper.iterations} iterations "
                             "without meeting the tolerance (bounds above remain valid)")
    return EXIT_OK


def cmd_embed(args, out) -> int:
    src, tgt = SpaceParams(args.u1, args.p1), SpaceParams(args.u2, args.p2)
    case = EmbeddingCase(src, tgt, args.d, args.j)
    ok = embedding_admissible(src, tgt)
    res = embedding_norm_closed_form(case)
    if res.kind == "exact":
        norm = f"||id_j|| = {fmt(res.value)}"
    else:
        norm = f"||id_j|| in [{fmt(res.lower)}, {fmt(res.upper)}]"
    out.write(f"{'admissible' if ok else 'not admissible'}; {norm}\n")
    if not ok:
        if tgt.u < src.u:
            out.write("hint: witness u-decrease gives ratio 2^(jd(1/u1-1/u2)) on one cube\n")
        else:
            out.write("hint: witness ratio-blowup grows without bound as j increases\n")
    if args.oracle:
        orc = embedding_norm_bruteforce(case, seed=args.seed)
        out.write(f"oracle = {fmt(orc.value)}; best 0/1 pattern "
                  f"{''.join(map(str, orc.pattern))} gives {fmt(orc.pattern_value)}\n")
        out.write("maximizer = " + " ".join(fmt(x) for x in orc.maximizer) + "\n")
    return EXIT_OK


def cmd_witness(args, out) -> int:
    src = SpaceParams(args.u1, args.p1)
    dest = Path(args.out)
    if args.kind == "u-decrease":
        tgt = SpaceParams(args.u2, args.p2)
        if not tgt.u < src.u:
            raise ValueError("u-decrease witness requires u2 < u1")
        seq = witness_u_decrease(src.u, src.p, args.d, args.j)
        seqio.save(seq, dest)
        a, b = morrey_norm(seq, src), morrey_norm(seq, tgt)
        out.write(f"wrote {dest}\nsource norm {fmt(a)}\ntarget norm {fmt(b)}\nratio {fmt(b / a)}\n")
    elif args.kind == "ratio-blowup":
        tgt = SpaceParams(args.u2, args.p2)
        w = witness_ratio_blowup(src, tgt, args.d, args.target)
        seqio.save(w.sequence, dest)
        out.write(f"wrote {dest}\nlevel {w.level}\nratio {fmt(w.ratio)}\n")
    else:
        levels = args.levels
        cells = sum(1 << (j * args.d) for j in levels)
        if args.count > 1 << min(cells, 62):
            raise ValueError(f"only {1 << cells} sign patterns exist for these levels")
        rng = np.random.default_rng(args.seed)
        signs, seen = [], set()
        while len(signs) < args.count:
            s = tuple(int(x) for x in rng.choice((-1, 1), size=cells))
            if s not in seen:
                seen.add(s)
                signs.append(s)
        family = separation_family(levels, args.d, src.u, signs)
        dest.mkdir(parents=True, exist_ok=True)
        width = len(str(len(family) - 1))
        for i, member in enumerate(family):
            seqio.save(member, dest / f"member_{i:0{width}d}.json")
        dist = min(separation_distance(a, b, src)
                   for i, a in enumerate(family) for b in family[i + 1:]) if len(family) > 1 else math.inf
        top = max(morrey_norm(m.magnitudes(), src) for m in family)
        out.write(f"wrote {len(family)} members to {dest}\n"
                  f"min pairwise distance {fmt(dist)}\n"
                  f"max member norm {fmt(top)}\n"
                  f"norm bound {fmt(separation_norm_bound(levels, args.d, src))}\n")
    return EXIT_OK


def _named_norm(text: str):
    t = text.strip().lower()
    if not t.startswith("l"):
        raise ValueError(f"norm must look like l1, l2 or linf, got {text!r}")
    try:
        return _exponent(t[1:])
    except argparse.ArgumentTypeError:
        raise ValueError(f"norm must look like l1, l2 or linf, got {text!r}") from None


def cmd_entropy(args, out) -> int:
    ks = args.k_range
    header = ["k", "lower", "upper"]
    rows = []
    if args.morrey:
        u1, p1, u2, p2 = args.morrey
        case = EmbeddingCase(SpaceParams(u1, p1), SpaceParams(u2, p2), args.d, args.j)
        header += ["sandwich_lower", "sandwich_upper"]
        N = case.cells
        prof = entropy_profile(morrey(case.source, args.d), morrey(case.target, args.d),
                               N, ks, args.delta)
        for est in prof:
            lo, hi, extra = est.lower, est.upper, ["", ""]
            if est.k >= 2 * N:
                s = entropy_morrey_sandwich(case, est.k, args.delta)
                # the seeded direct search certifies its own bracket; keep the tighter ends
                lo, hi = max(lo, s.direct.lower), min(hi, s.direct.upper)
                extra = [fmt(s.lower), fmt(s.upper)]
            rows.append([str(est.k), fmt(lo), fmt(hi)] + extra)
    else:
        if args.N is None or args.source is None or args.target is None:
            raise ValueError("give --source, --target and --N, or --morrey")
        p1, p2 = _named_norm(args.source), _named_norm(args.target)
        header += ["schuett_reference"]
        prof = entropy_profile(lp(p1), lp(p2), args.N, ks, args.delta)
        for est in prof:
            rows.append([str(est.k), fmt(est.lower), fmt(est.upper),
                         fmt(entropy_schuett(args.N, p1, p2, est.k))])
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            _write_tsv(fh, header, rows)
        out.write(f"wrote {args.out}\n")
    else:
        _write_tsv(out, header, rows)
    return EXIT_OK


def _write_tsv(fh, header, rows):
    w = csv.writer(fh, delimiter="\t", lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="morreyseq", description="Morrey sequence space toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    p = sub.add_parser("norm", parents=[seed], help="norms of a sequence file")
    p.add_argument("file")
    p.add_argument("--u", type=_exponent, required=True)
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--variant", default="dyadic",
                   choices=["dyadic", "arb1", "arb2", "lorentz", "lp", "linf", "predual-level"])
    p.add_argument("--j", type=int, help="level for --variant predual-level")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("predual", parents=[seed], help="two-sided predual norm bounds")
    p.add_argument("file")
    p.add_argument("--u", type=_exponent, required=True)
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--jmax", type=int)
    p.add_argument("--max-iter", type=int, default=20000)
    p.set_defaults(func=cmd_predual)

    p = sub.add_parser("embed", parents=[seed], help="embedding admissibility and norms")
    for name in ("u1", "p1", "u2", "p2"):
        p.add_argument(name, type=_exponent)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("witness", parents=[seed], help="write witness sequences")
    p.add_argument("kind", choices=["u-decrease", "ratio-blowup", "separation"])
    p.add_argument("--u1", type=_exponent, required=True)
    p.add_argument("--p1", type=_exponent, required=True)
    p.add_argument("--u2", type=_exponent)
    p.add_argument("--p2", type=_exponent)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--target", type=float, default=4.0, help="ratio to reach (ratio-blowup)")
    p.add_argument("--levels", type=int, nargs="+", default=[1, 3], help="separation levels")
    p.add_argument("--count", type=int, default=16, help="separation family size")
    p.add_argument("--out", required=True, help="output file (directory for separation)")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("entropy", parents=[seed], help="entropy number report")
    p.add_argument("--source", help="source norm, e.g. l1")
    p.add_argument("--target", help="target norm, e.g. linf")
    p.add_argument("--N", type=int, help="real dimension")
    p.add_argument("--morrey", type=_exponent, nargs=4, metavar=("U1", "P1", "U2", "P2"))
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--k-range", type=_k_range, default=_k_range("1:4"))
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--out", help="TSV path (default stdout)")
    p.set_defaults(func=cmd_entropy)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "witness" and args.kind != "separation" and (args.u2 is None or args.p2 is None):
        err.write("error: this witness needs --u2 and --p2\n")
        return EXIT_DOMAIN
    try:
        return args.func(args, out)
    except seqio.SequenceFileError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_IO
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_IO
    except NonConvergence as exc:
        err.write(f"error: {exc}\n")
        return EXIT_SOLVER
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
