"""Command-line interface.

Exit status: 0 on success, 1 on invalid input or usage, 2 when the request
is well formed but infeasible (rank-deficient decode, no repair pair,
fewer than k contacted nodes).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import anchors, bandwidth, resilience, scheduler, store
from .codec import CodeParameterError, RankDeficientError, RepairInfeasible, log_exact, new_code
from .galois import MAX_DEGREE

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

COLUMNS = """\
CSV columns:
  resilience  n,k,q,p_node,p_obj_hsrc,p_obj_mds[,p_obj_mc,stderr,trials,seed]
  profile     x,rho_x,one_minus_rho,mds,rho_exact
  bandwidth   x_th,gamma_egr,gamma_prl,gamma_seq,gamma_eclazy,gamma_msrgc_d<d>...,gamma_seq_open,is_bound
              (is_bound=1: prl/seq rest on the D_x upper bound)
  schedule    slot,downloader,uploader (fragment indices)
  encode      fragment_index,path,bytes
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="hsrc",
        description="Homomorphic self-repairing codes: storage pipeline and analytics.",
        epilog=COLUMNS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def code_flags(sp, need_n=True):
        sp.add_argument("--q", type=int, default=2, help="base field size, a power of 2 (default 2)")
        sp.add_argument("--k", type=int, required=True, help="source fragments")
        sp.add_argument("--n", type=int, required=need_n, help="encoded fragments, q^e - 1")

    sp = sub.add_parser("encode", help="encode a file into n fragment files")
    sp.add_argument("input", help="file to encode")
    code_flags(sp)
    sp.add_argument("--slice-size", type=int, help="slice size in bytes, a multiple of k (default: widest supported)")
    sp.add_argument("--out", required=True, help="output directory for fragment files")

    sp = sub.add_parser("decode", help="rebuild a file from fragment files")
    sp.add_argument("fragments", nargs="+")
    sp.add_argument("--out", help="output file (default: standard output)")

    sp = sub.add_parser("repair", help="regenerate one fragment file from a pair of others")
    sp.add_argument("fragments", nargs="+", help="available fragment files")
    sp.add_argument("--index", type=int, required=True, help="fragment index to regenerate")
    sp.add_argument("--out", required=True, help="output fragment file")

    sp = sub.add_parser("resilience", help="object availability, HSRC vs MDS")
    code_flags(sp)
    sp.add_argument("--pnode", type=_float_list, required=True, help="node availability, comma-separated")
    sp.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0: analytic only)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out")

    sp = sub.add_parser("profile", help="retrieval probability from x random nodes")
    code_flags(sp)
    sp.add_argument("--out")

    sp = sub.add_parser("bandwidth", help="per-lost-fragment repair traffic in units of B/k")
    code_flags(sp)
    sp.add_argument("--xth", type=int, help="only this lazy threshold")
    sp.add_argument("--dcontact", type=_int_list, default=[], help="MSR contact counts, comma-separated")
    sp.add_argument("--out")

    sp = sub.add_parser("schedule", help="time-slotted parallel pair repair")
    code_flags(sp)
    sp.add_argument("--M", type=int, help="object symbols (default: smallest valid)")
    sp.add_argument("--missing", type=_int_list, required=True, help="missing fragment indices")
    sp.add_argument("--available", type=_int_list, help="live fragment indices (default: all others)")
    sp.add_argument("--out")

    sp = sub.add_parser("validate", help="check every published reference value")
    sp.add_argument("--out")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"{out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _default_slice_size(q: int, k: int) -> int:
    t = log_exact(q, 2)
    if t is None:
        raise CodeParameterError(f"q={q} is not a power of 2")
    block = 1
    while t * -(-8 * (block + 1) // t) <= MAX_DEGREE:
        block += 1
    return k * block


def _cmd_encode(a) -> int:
    try:
        data = Path(a.input).read_bytes()
    except OSError as exc:
        raise OSError(f"{a.input}: {exc.strerror or exc}") from exc
    if not data:
        raise ValueError("empty input")
    size = a.slice_size or _default_slice_size(a.q, a.k)
    plan = store.plan_slices(len(data), a.q, a.k, size, a.n)
    paths = store.write_fragments(store.encode_file(data, plan), a.out, Path(a.input).name)
    _emit(_csv(["fragment_index", "path", "bytes"], [(j, p, p.stat().st_size) for j, p in enumerate(paths, 1)]), None)
    return EXIT_OK


def _cmd_decode(a) -> int:
    data = store.decode_file(a.fragments)
    if a.out:
        Path(a.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def _cmd_repair(a) -> int:
    result = store.repair_file(a.index, a.fragments)
    Path(a.out).write_bytes(result.fragment)
    print(f"fragment {a.index} rebuilt from {result.sources[0]} and {result.sources[1]}; downloads={result.downloads}")
    return EXIT_OK


def _cmd_resilience(a) -> int:
    header = ["n", "k", "q", "p_node", "p_obj_hsrc", "p_obj_mds"]
    if a.trials:
        header += ["p_obj_mc", "stderr", "trials", "seed"]
    rows = []
    for p in a.pnode:
        model = resilience.AvailabilityModel(p, a.n, a.k, a.q)
        row = [a.n, a.k, a.q, p, resilience.p_obj_hsrc(model), resilience.p_obj_mds(a.n, a.k, p)]
        if a.trials:
            mc = resilience.simulate_p_obj(model, a.trials, a.seed, a.threads)
            row += [mc.estimate, mc.stderr, mc.trials, a.seed]
        rows.append(row)
    _emit(_csv(header, rows), a.out)
    return EXIT_OK


def _cmd_profile(a) -> int:
    prof = resilience.retrieval_profile(a.n, a.k, a.q)
    rows = [(r.x, r.rho_x, f"{float(1 - r.rho_x):.4f}", r.mds, str(r.rho_x)) for r in prof.rows]
    text = _csv(["x", "rho_x", "one_minus_rho", "mds", "rho_exact"], rows)
    _emit(text + f"# decodable {a.k}-subsets: {prof.decodable_subsets}\n", a.out)
    return EXIT_OK


def _cmd_bandwidth(a) -> int:
    rows = bandwidth.traffic_table(a.n, a.k, a.dcontact, open_sequential=True)
    if a.xth is not None:
        rows = [r for r in rows if r["x_th"] == a.xth]
        if not rows:
            raise ValueError(f"--xth must lie in {a.k}..{a.n - 1}")
    header = list(rows[0])
    _emit(_csv(header, [[r[h] for h in header] for r in rows]), a.out)
    return EXIT_OK


def _cmd_schedule(a) -> int:
    e = log_exact(a.n + 1, a.q)
    if e is None:
        raise CodeParameterError(f"n + 1 = {a.n + 1} is not a power of q={a.q}")
    M = a.M or a.k * max(a.k, e)
    c = new_code(a.q, a.k, M, a.n)
    for i in a.missing + (a.available or []):
        if not 1 <= i <= a.n:
            raise ValueError(f"fragment index {i} outside 1..{a.n}")
    available = a.available if a.available is not None else [i for i in range(1, a.n + 1) if i not in a.missing]
    s = scheduler.schedule_repairs([c.alpha(i) for i in a.missing], [c.alpha(i) for i in available], c)
    text = _csv(["slot", "downloader", "uploader"], s.rows())
    check = scheduler.verify_schedule(s, c)
    text += f"# makespan {s.makespan}, lower bound {scheduler.makespan_lower_bound(len(s.pairs), len(available))}"
    text += f", valid {check.valid}\n"
    _emit(text, a.out)
    if s.infeasible:
        idx = ", ".join(str(c.index_of(t)) for t in s.infeasible)
        print(f"error: no repair pair for fragment(s) {idx}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_validate(a) -> int:
    lines = []
    for r in anchors.validate_anchors():
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    _emit("\n".join(lines) + "\n", a.out)
    return EXIT_OK


COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "repair": _cmd_repair,
    "resilience": _cmd_resilience,
    "profile": _cmd_profile,
    "bandwidth": _cmd_bandwidth,
    "schedule": _cmd_schedule,
    "validate": _cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except (RankDeficientError, RepairInfeasible, bandwidth.RgcInfeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
