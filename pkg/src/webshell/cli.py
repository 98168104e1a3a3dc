"""Command-line entry points: ``webshell <subcommand>`` and ``wsh``."""

from __future__ import annotations

import argparse
import os
import re
import sys

from . import apps, net
from .fixtures import FixtureServer, load_overrides
from .interp import Interp
from .tcl import TclError, format_list, parse_script

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _non_negative(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {value}")
    return value


def _positive(text):
    value = _non_negative(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def default_timeout_ms() -> int:
    env = os.environ.get("WEBSHELL_TIMEOUT_MS")
    if env:
        try:
            return _positive(env)
        except argparse.ArgumentTypeError:
            pass
    return apps.DEFAULT_FETCH_TIMEOUT_MS


# -- wsh ----------------------------------------------------------------------

def run_script(path: str, args: list[str], out=None, err=None) -> int:
    err = err or sys.stderr
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"wsh: cannot read {path}: {exc.strerror}", file=err)
        return EXIT_FAIL
    interp = Interp(out)
    interp.set_var("argv0", path)
    interp.set_var("argv", format_list(args))
    interp.set_var("argc", str(len(args)))
    try:
        interp.eval_top(source)
    except TclError as exc:
        print(f"wsh: {exc}", file=err)
        return EXIT_FAIL
    return EXIT_OK


def _complete(source: str) -> bool:
    try:
        parse_script(source)
    except TclError as exc:
        return "missing" not in str(exc)
    return True


def repl(stdin=None, out=None) -> int:
    stdin = stdin or sys.stdin
    interactive = stdin.isatty()
    interp = Interp(out)
    interp.set_var("argv", "")
    buf = ""
    while True:
        if interactive:
            sys.stdout.write("% " if not buf else "> ")
            sys.stdout.flush()
        line = stdin.readline()
        if not line:
            break
        buf += line
        if not _complete(buf):
            continue
        source, buf = buf, ""
        try:
            result = interp.eval_top(source)
        except TclError as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        if result and interactive:
            interp.write(result + "\n")
    return EXIT_OK


# -- subcommands -------------------------------------------------------------

def cmd_wsh(opts) -> int:
    if opts.script is None:
        return repl()
    return run_script(opts.script, opts.args)


def cmd_webgrep(opts) -> int:
    try:
        re.compile(opts.pattern)
    except re.error as exc:
        print(f"webgrep: bad pattern: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = apps.webgrep(opts.url, opts.depth, opts.pattern, timeout_ms=opts.timeout,
                          parallel=opts.parallel, raw_hrefs=opts.raw_hrefs)
    for url in result.matches:
        print(url)
    print(f"# {len(result.matches)} matches, {result.visited} pages fetched, {len(result.failed)} failed")
    if opts.depth > 0 and opts.url in result.failed:
        print(f"webgrep: cannot fetch {opts.url}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_linkcheck(opts) -> int:
    try:
        report = apps.annotate_links(opts.url)
    except net.NetError as exc:
        print(f"linkcheck: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for entry in report.links:
        print(f"{entry.verdict.upper()} {entry.resolved or '-'} {entry.href}")
    if opts.out:
        try:
            with open(opts.out, "w", encoding="utf-8") as fh:
                fh.write(report.annotated_html)
        except OSError as exc:
            print(f"linkcheck: cannot write {opts.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def cmd_webcopy(opts) -> int:
    try:
        count = apps.webcopy(opts.url, opts.depth, opts.out, timeout_ms=opts.timeout)
    except OSError as exc:
        print(f"webcopy: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"{count} files written to {opts.out}")
    if opts.depth > 0 and count == 0:
        print(f"webcopy: cannot fetch {opts.url}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_serve(opts) -> int:
    try:
        overrides = load_overrides(opts.overrides) if opts.overrides else None
        server = FixtureServer(opts.root, overrides, port=opts.port)
    except (OSError, ValueError) as exc:
        print(f"serve-fixtures: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"serving {opts.root} at {server.base_url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="webshell", description="Scriptable web retrieval and HTML tree tools.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("wsh", help="run a script, or start a REPL")
    p.add_argument("script", nargs="?")
    p.add_argument("args", nargs=argparse.REMAINDER)
    p.set_defaults(func=cmd_wsh)

    p = sub.add_parser("webgrep", help="search pages reachable from a URL")
    p.add_argument("--url", required=True)
    p.add_argument("--depth", required=True, type=_non_negative)
    p.add_argument("--pattern", required=True)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--raw-hrefs", action="store_true")
    p.add_argument("--timeout", type=_positive, default=default_timeout_ms(), metavar="MS")
    p.set_defaults(func=cmd_webgrep)

    p = sub.add_parser("linkcheck", help="validate links and strike out broken ones")
    p.add_argument("--url", required=True)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_linkcheck)

    p = sub.add_parser("webcopy", help="mirror a site subtree")
    p.add_argument("--url", required=True)
    p.add_argument("--depth", required=True, type=_non_negative)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--timeout", type=_positive, default=default_timeout_ms(), metavar="MS")
    p.set_defaults(func=cmd_webcopy)

    p = sub.add_parser("serve-fixtures", help="run the fixture HTTP server")
    p.add_argument("--root", required=True)
    p.add_argument("--port", type=_non_negative, default=8000)
    p.add_argument("--overrides", metavar="FILE")
    p.set_defaults(func=cmd_serve)
    return top


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    return opts.func(opts)


def wsh_main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        return repl()
    return run_script(argv[0], argv[1:])


if __name__ == "__main__":
    sys.exit(main())
