"""A small Tcl-subset interpreter.

Supported builtins: set, puts, list, lappend, foreach, for, while, if,
incr, proc, return, catch, error, break, continue, switch, after, expr,
scan, regexp and ``info exists``. Everything else (the ``ws::*`` family)
is registered by :mod:`webshell.wscommands`.

Two departures from stock Tcl keep the published scripts running as
written: a bare ``if``/``while`` condition such as ``while [more $it]`` is
re-evaluated as an expression each time instead of being substituted once,
and ``[cmd]{`` splits into two words.
"""

from __future__ import annotations

import copy
import fnmatch
import re
import sys
from typing import Callable

from . import tasks
from .tcl import (
    CmdSub,
    TclError,
    VarSub,
    Word,
    format_list,
    line_of,
    parse_expr,
    parse_list,
    parse_script,
)

__all__ = ["Interp", "TclError", "Proc", "MAX_NESTING"]

MAX_NESTING = 120
INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1


class _Return(Exception):
    def __init__(self, value: str):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class Frame:
    __slots__ = ("vars",)

    def __init__(self, variables=None):
        self.vars: dict = variables if variables is not None else {}


def _split_name(name: str):
    if name.endswith(")"):
        i = name.find("(")
        if i > 0:
            return name[:i], name[i + 1:-1]
    return name, None


class Proc:
    def __init__(self, name: str, params: list[tuple[str, str | None]], body: str):
        self.name = name
        self.params = params
        self.body = body

    def usage(self) -> str:
        parts = [self.name]
        for pname, default in self.params:
            if pname == "args" and (pname, default) == self.params[-1]:
                parts.append("?arg ...?")
            elif default is None:
                parts.append(pname)
            else:
                parts.append(f"?{pname}?")
        return " ".join(parts)

    def __call__(self, interp: "Interp", args: list[str]) -> str:
        frame = Frame()
        params = self.params
        variadic = bool(params) and params[-1][0] == "args"
        fixed = params[:-1] if variadic else params
        if len(args) > len(fixed) and not variadic:
            raise TclError(f'wrong # args: should be "{self.usage()}"')
        for i, (pname, default) in enumerate(fixed):
            if i < len(args):
                frame.vars[pname] = args[i]
            elif default is not None:
                frame.vars[pname] = default
            else:
                raise TclError(f'wrong # args: should be "{self.usage()}"')
        if variadic:
            frame.vars["args"] = format_list(args[len(fixed):])
        interp.frames.append(frame)
        try:
            return interp.eval(self.body)
        except _Return as r:
            return r.value
        except (_Break, _Continue):
            raise TclError('invoked "break" or "continue" outside of a loop') from None
        finally:
            interp.frames.pop()


class Interp:
    def __init__(self, out=None, *, handles=None, register_ws: bool = True):
        self.out = out
        self.commands: dict[str, Callable] = dict(BUILTINS)
        self.globals = Frame()
        self.frames: list[Frame] = [self.globals]
        self.depth = 0
        if handles is None:
            from .wscommands import HandleTable

            handles = HandleTable()
        self.handles = handles
        if register_ws:
            from .wscommands import register

            register(self)

    # -- output ---------------------------------------------------------

    def write(self, text: str) -> None:
        stream = self.out if self.out is not None else sys.stdout
        stream.write(text)
        flush = getattr(stream, "flush", None)
        if flush:
            flush()

    # -- child interpreters ----------------------------------------------

    def child(self) -> "Interp":
        """Fresh interpreter for a task: copied globals and commands, shared handles."""
        kid = Interp(self.out, handles=self.handles, register_ws=False)
        kid.commands = dict(self.commands)
        kid.globals.vars = copy.deepcopy(self.globals.vars)
        return kid

    def register(self, name: str, fn: Callable) -> None:
        self.commands[name] = fn

    # -- variables ------------------------------------------------------

    def _read_frame(self, base: str) -> Frame | None:
        cur = self.frames[-1]
        if base in cur.vars:
            return cur
        if cur is not self.globals and base in self.globals.vars:
            return self.globals
        return None

    def get_var(self, name: str, index: str | None = None) -> str:
        base = name
        if index is None:
            base, index = _split_name(name)
        frame = self._read_frame(base)
        shown = base if index is None else f"{base}({index})"
        if frame is None:
            raise TclError(f"can't read \"{shown}\": no such variable")
        value = frame.vars[base]
        if index is None:
            if isinstance(value, dict):
                raise TclError(f"can't read \"{shown}\": variable is array")
            return value
        if not isinstance(value, dict):
            raise TclError(f"can't read \"{shown}\": variable isn't array")
        if index not in value:
            raise TclError(f"can't read \"{shown}\": no such element in array")
        return value[index]

    def set_var(self, name: str, value: str, index: str | None = None) -> str:
        base = name
        if index is None:
            base, index = _split_name(name)
        frame = self.frames[-1]
        current = frame.vars.get(base)
        if index is None:
            if isinstance(current, dict):
                raise TclError(f"can't set \"{base}\": variable is array")
            frame.vars[base] = value
        else:
            if current is None:
                current = frame.vars[base] = {}
            elif not isinstance(current, dict):
                raise TclError(f"can't set \"{base}({index})\": variable isn't array")
            current[index] = value
        return value

    def var_exists(self, name: str) -> bool:
        base, index = _split_name(name)
        frame = self._read_frame(base)
        if frame is None:
            return False
        value = frame.vars[base]
        if index is None:
            return not isinstance(value, dict)
        return isinstance(value, dict) and index in value

    # -- evaluation -----------------------------------------------------

    def eval(self, source: str) -> str:
        self.depth += 1
        try:
            if self.depth > MAX_NESTING:
                raise TclError("too many nested evaluations (infinite loop?)")
            return self._run(parse_script(source))
        except RecursionError:
            raise TclError("too many nested evaluations (infinite loop?)") from None
        finally:
            self.depth -= 1

    def eval_top(self, source: str) -> str:
        """Evaluate a whole script; a top-level ``return`` ends it early."""
        try:
            return self.eval(source)
        except _Return as r:
            return r.value
        except (_Break, _Continue):
            raise TclError('invoked "break" or "continue" outside of a loop') from None

    def pipe_eval(self, source: str) -> str:
        commands = parse_script(source)
        for cmd in commands:
            if cmd.words[0].literal != "|":
                raise TclError(f"line {line_of(cmd.source, cmd.pos)}: pipe segment must start with |")
        return self._run(commands)

    def _run(self, commands) -> str:
        result = ""
        piping = False
        for cmd in commands:
            tasks.checkpoint()
            words = cmd.words
            if words[0].literal == "|":
                words = words[1:]
                if not words:
                    raise TclError(f"line {line_of(cmd.source, cmd.pos)}: empty pipe segment")
                argv = self._substitute(words)
                if piping:
                    argv.append(result)
                piping = True
            else:
                piping = False
                argv = self._substitute(words)
            result = self.call(argv, cmd)
        return result

    def _substitute(self, words) -> list[str]:
        head = words[0].literal
        argv = [self._word(w) for w in words] if head not in ("if", "while") else \
            self._substitute_conditional(words)
        return argv

    def _substitute_conditional(self, words) -> list[str]:
        head = words[0].literal
        argv = []
        cond_next = True
        for i, w in enumerate(words):
            if i == 0:
                argv.append(head)
                continue
            if cond_next and w.kind == "bare" and w.literal is None:
                argv.append(w.raw)  # re-evaluated as an expression
            else:
                argv.append(self._word(w))
            cond_next = head == "if" and w.literal == "elseif"
        return argv

    def _word(self, w: Word) -> str:
        parts = w.parts
        if len(parts) == 1 and type(parts[0]) is str:
            return parts[0]
        return "".join(self._part(p) for p in parts)

    def _part(self, p) -> str:
        if type(p) is str:
            return p
        if type(p) is VarSub:
            if p.index is None:
                return self.get_var(p.name)
            return self.get_var(p.name, "".join(self._part(x) for x in p.index))
        return self._run(p.commands)

    def call(self, argv: list[str], cmd=None) -> str:
        name = argv[0]
        fn = self.commands.get(name)
        if fn is None:
            raise TclError(f'invalid command name "{name}"')
        try:
            result = fn(self, argv[1:])
        except (TclError, _Return, _Break, _Continue, tasks.Cancelled):
            raise
        except RecursionError:
            raise TclError("too many nested evaluations (infinite loop?)") from None
        except Exception as exc:
            raise TclError(str(exc) or type(exc).__name__) from exc
        return "" if result is None else str(result)

    # -- expressions ----------------------------------------------------

    def expr(self, source: str):
        return self._eval_expr(parse_expr(source))

    def expr_string(self, source: str) -> str:
        return _format_value(self.expr(source))

    def expr_bool(self, source: str) -> bool:
        return _truth(self.expr(source))

    def _eval_expr(self, node):
        tag = node[0]
        if tag == "lit":
            return node[1]
        if tag == "var":
            return self._part(node[1])
        if tag == "cmd":
            return self._run(node[1].commands)
        if tag == "str":
            return "".join(self._part(p) for p in node[1])
        if tag == "un":
            op, value = node[1], self._eval_expr(node[2])
            if op == "!":
                return int(not _truth(value))
            num = _number(value, op)
            if op == "-":
                return _checked(-num)
            if op == "~":
                if not isinstance(num, int):
                    raise TclError('can\'t use floating-point value as operand of "~"')
                return ~num
            return num
        if tag == "?":
            return self._eval_expr(node[2] if _truth(self._eval_expr(node[1])) else node[3])
        op = node[1]
        if op == "&&":
            return int(_truth(self._eval_expr(node[2])) and _truth(self._eval_expr(node[3])))
        if op == "||":
            return int(_truth(self._eval_expr(node[2])) or _truth(self._eval_expr(node[3])))
        return _binary(op, self._eval_expr(node[2]), self._eval_expr(node[3]))


# -- value helpers ----------------------------------------------------------

_INT_RE = re.compile(r"\s*[-+]?(?:0[xX][0-9a-fA-F]+|0[oO][0-7]+|0[bB][01]+|\d+)\s*$")
_FLOAT_RE = re.compile(r"\s*[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?\s*$")


def _as_number(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    s = str(value)
    if _INT_RE.match(s):
        return int(s.strip(), 0) if not re.match(r"\s*[-+]?0\d", s) else int(s.strip(), 10)
    if _FLOAT_RE.match(s):
        return float(s)
    return None


def _number(value, op):
    num = _as_number(value)
    if num is None:
        raise TclError(f'can\'t use non-numeric string "{value}" as operand of "{op}"')
    return num


def _checked(num):
    if isinstance(num, int) and not INT_MIN <= num <= INT_MAX:
        raise TclError("integer overflow")
    return num


def _truth(value) -> bool:
    num = _as_number(value)
    if num is not None:
        return num != 0
    s = str(value).strip().lower()
    if s in ("true", "yes", "on"):
        return True
    if s in ("false", "no", "off"):
        return False
    raise TclError(f'expected boolean value but got "{value}"')


def _format_value(value) -> str:
    if isinstance(value, float):
        text = repr(value)
        return text
    return str(value)


def _binary(op, a, b):
    if op in ("eq", "ne"):
        same = str(a) == str(b)
        return int(same if op == "eq" else not same)
    if op in ("==", "!=", "<", ">", "<=", ">="):
        na, nb = _as_number(a), _as_number(b)
        if na is not None and nb is not None:
            x, y = na, nb
        else:
            x, y = _format_value(a), _format_value(b)
        return int({"==": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op])
    x, y = _number(a, op), _number(b, op)
    if op == "+":
        return _checked(x + y)
    if op == "-":
        return _checked(x - y)
    if op == "*":
        return _checked(x * y)
    if op in ("/", "%"):
        if y == 0:
            raise TclError("divide by zero")
        if isinstance(x, int) and isinstance(y, int):
            return _checked(x // y if op == "/" else x % y)
        if op == "%":
            raise TclError('can\'t use floating-point value as operand of "%"')
        return x / y
    if op == "**":
        return _checked(x ** y)
    if not (isinstance(x, int) and isinstance(y, int)):
        raise TclError(f'can\'t use floating-point value as operand of "{op}"')
    if op == "<<":
        return _checked(x << y)
    if op == ">>":
        return x >> y
    if op == "&":
        return x & y
    if op == "|":
        return x | y
    if op == "^":
        return x ^ y
    raise TclError(f"unknown operator {op}")


def _arity(args, lo, hi, usage):
    if len(args) < lo or (hi is not None and len(args) > hi):
        raise TclError(f'wrong # args: should be "{usage}"')


def _cond(interp: Interp, word: str) -> bool:
    return interp.expr_bool(word)


# -- builtins ---------------------------------------------------------------

def cmd_set(interp, args):
    _arity(args, 1, 2, "set varName ?newValue?")
    if len(args) == 1:
        return interp.get_var(args[0])
    return interp.set_var(args[0], args[1])


def cmd_puts(interp, args):
    _arity(args, 1, 3, "puts ?-nonewline? ?channelId? string")
    newline = True
    if args[0] == "-nonewline":
        newline = False
        args = args[1:]
    if len(args) == 2:
        channel, text = args
        if channel == "stderr":
            sys.stderr.write(text + ("\n" if newline else ""))
            return ""
        if channel != "stdout":
            raise TclError(f'can not find channel named "{channel}"')
    elif len(args) == 1:
        text = args[0]
    else:
        raise TclError('wrong # args: should be "puts ?-nonewline? ?channelId? string"')
    interp.write(text + ("\n" if newline else ""))
    return ""


def cmd_list(interp, args):
    return format_list(args)


def cmd_lappend(interp, args):
    _arity(args, 1, None, "lappend varName ?value value ...?")
    name = args[0]
    current = interp.get_var(name) if interp.var_exists(name) else ""
    items = parse_list(current) + list(args[1:])
    return interp.set_var(name, format_list(items))


def _loop_body(interp, body) -> bool:
    """Run one loop iteration; False means break."""
    try:
        interp.eval(body)
    except _Break:
        return False
    except _Continue:
        pass
    return True


def cmd_foreach(interp, args):
    if len(args) < 3 or len(args) % 2 == 0:
        raise TclError('wrong # args: should be "foreach varList list ?varList list ...? command"')
    body = args[-1]
    groups = []
    rounds = 0
    for i in range(0, len(args) - 1, 2):
        names = parse_list(args[i])
        if not names:
            raise TclError("foreach varlist is empty")
        values = parse_list(args[i + 1])
        groups.append((names, values))
        rounds = max(rounds, -(-len(values) // len(names)))
    for r in range(rounds):
        for names, values in groups:
            for j, name in enumerate(names):
                k = r * len(names) + j
                interp.set_var(name, values[k] if k < len(values) else "")
        if not _loop_body(interp, body):
            break
    return ""


def cmd_for(interp, args):
    _arity(args, 4, 4, "for start test next command")
    start, test, step, body = args
    interp.eval(start)
    while _cond(interp, test):
        if not _loop_body(interp, body):
            break
        interp.eval(step)
    return ""


def cmd_while(interp, args):
    _arity(args, 2, 2, "while test command")
    test, body = args
    while _cond(interp, test):
        if not _loop_body(interp, body):
            break
    return ""


def cmd_if(interp, args):
    i = 0
    n = len(args)
    while True:
        if i >= n:
            raise TclError('wrong # args: no expression after "if" argument')
        cond = args[i]
        i += 1
        if i < n and args[i] == "then":
            i += 1
        if i >= n:
            raise TclError(f'wrong # args: no script following "{cond}" argument')
        body = args[i]
        i += 1
        if _cond(interp, cond):
            return interp.eval(body)
        if i >= n:
            return ""
        if args[i] == "elseif":
            i += 1
            continue
        if args[i] == "else":
            i += 1
            if i >= n:
                raise TclError('wrong # args: no script following "else" argument')
        if i != n - 1:
            raise TclError("wrong # args: extra words after \"else\" clause in \"if\" command")
        return interp.eval(args[i])


def cmd_incr(interp, args):
    _arity(args, 1, 2, "incr varName ?increment?")
    name = args[0]
    step = _as_number(args[1]) if len(args) == 2 else 1
    if not isinstance(step, int):
        raise TclError(f'expected integer but got "{args[1]}"')
    current = interp.get_var(name) if interp.var_exists(name) else "0"
    value = _as_number(current)
    if not isinstance(value, int):
        raise TclError(f'expected integer but got "{current}"')
    return interp.set_var(name, str(_checked(value + step)))


def cmd_proc(interp, args):
    _arity(args, 3, 3, "proc name args body")
    name, spec, body = args
    params = []
    for item in parse_list(spec):
        parts = parse_list(item)
        if not parts or len(parts) > 2:
            raise TclError(f'bad argument specifier "{item}"')
        params.append((parts[0], parts[1] if len(parts) == 2 else None))
    interp.register(name, Proc(name, params, body))
    return ""


def cmd_return(interp, args):
    _arity(args, 0, 1, "return ?value?")
    raise _Return(args[0] if args else "")


def cmd_catch(interp, args):
    _arity(args, 1, 2, "catch script ?varName?")
    code, result = 0, ""
    try:
        result = interp.eval(args[0])
    except TclError as exc:
        code, result = 1, str(exc)
        interp.globals.vars["errorCode"] = exc.code or "NONE"
    except _Return as r:
        code, result = 2, r.value
    except _Break:
        code = 3
    except _Continue:
        code = 4
    if len(args) == 2:
        interp.set_var(args[1], result)
    return str(code)


def cmd_error(interp, args):
    _arity(args, 1, 3, "error message ?info? ?code?")
    raise TclError(args[0], args[2] if len(args) == 3 else None)


def cmd_break(interp, args):
    _arity(args, 0, 0, "break")
    raise _Break()


def cmd_continue(interp, args):
    _arity(args, 0, 0, "continue")
    raise _Continue()


def cmd_switch(interp, args):
    mode = "exact"
    i = 0
    while i < len(args) and args[i].startswith("-"):
        opt = args[i]
        i += 1
        if opt == "--":
            break
        if opt in ("-exact", "-glob", "-regexp"):
            mode = opt[1:]
        else:
            raise TclError(f'bad option "{opt}": must be -exact, -glob, -regexp, or --')
    rest = args[i:]
    if len(rest) < 2:
        raise TclError('wrong # args: should be "switch ?switches? string pattern body ... ?default body?"')
    subject = rest[0]
    pairs = parse_list(rest[1]) if len(rest) == 2 else rest[1:]
    if len(pairs) % 2:
        raise TclError("extra switch pattern with no body")
    for k in range(0, len(pairs), 2):
        pattern = pairs[k]
        last = k == len(pairs) - 2
        if (last and pattern == "default") or _switch_match(mode, pattern, subject):
            j = k
            while pairs[j + 1] == "-":
                j += 2
                if j >= len(pairs):
                    raise TclError(f'no body specified for pattern "{pattern}"')
            return interp.eval(pairs[j + 1])
    return ""


def _switch_match(mode, pattern, subject) -> bool:
    if mode == "exact":
        return pattern == subject
    if mode == "glob":
        return fnmatch.fnmatchcase(subject, pattern)
    return re.search(pattern, subject) is not None


def cmd_after(interp, args):
    _arity(args, 1, 1, "after milliseconds")
    ms = _as_number(args[0])
    if not isinstance(ms, int) or ms < 0:
        raise TclError(f'bad argument "{args[0]}": must be a non-negative integer')
    tasks.sleep(ms)
    return ""


def cmd_expr(interp, args):
    _arity(args, 1, None, "expr arg ?arg ...?")
    return interp.expr_string(" ".join(args))


_SCAN_SPEC = re.compile(r"%(\*?)(\d*)([sdc])")


def cmd_scan(interp, args):
    _arity(args, 2, None, "scan string format ?varName ...?")
    text, fmt, names = args[0], args[1], args[2:]
    values: list[str] = []
    pos = 0
    i = 0
    while i < len(fmt):
        c = fmt[i]
        if c.isspace():
            while pos < len(text) and text[pos].isspace():
                pos += 1
            i += 1
            continue
        if c != "%":
            if pos < len(text) and text[pos] == c:
                pos += 1
                i += 1
                continue
            break
        m = _SCAN_SPEC.match(fmt, i)
        if not m:
            raise TclError(f'bad scan conversion in "{fmt}"')
        i = m.end()
        skip, width, conv = m.group(1), m.group(2), m.group(3)
        if conv != "c":
            while pos < len(text) and text[pos].isspace():
                pos += 1
        if pos >= len(text):
            break
        limit = len(text) if not width else pos + int(width)
        if conv == "s":
            end = pos
            while end < min(limit, len(text)) and not text[end].isspace():
                end += 1
            value = text[pos:end]
        elif conv == "d":
            dm = re.compile(r"[-+]?\d+").match(text, pos, min(limit, len(text)))
            if not dm:
                break
            end = dm.end()
            value = str(int(dm.group()))
        else:
            end = pos + 1
            value = str(ord(text[pos]))
        pos = end
        if not skip:
            values.append(value)
    if not names:
        return format_list(values)
    if len([s for s in _SCAN_SPEC.finditer(fmt) if not s.group(1)]) != len(names):
        raise TclError("different numbers of variable names and field specifiers")
    for name, value in zip(names, values):
        interp.set_var(name, value)
    if not values and pos >= len(text):
        return "-1"
    return str(len(values))


def cmd_regexp(interp, args):
    flags = 0
    i = 0
    while i < len(args) and args[i].startswith("-"):
        opt = args[i]
        i += 1
        if opt == "--":
            break
        if opt == "-nocase":
            flags |= re.IGNORECASE
        else:
            raise TclError(f'bad switch "{opt}": must be -nocase or --')
    rest = args[i:]
    if len(rest) < 2:
        raise TclError('wrong # args: should be "regexp ?-nocase? ?--? exp string ?matchVar? ?subMatchVar ...?"')
    pattern, subject, names = rest[0], rest[1], rest[2:]
    try:
        compiled = re.compile(pattern, flags)
    except re.error as exc:
        raise TclError(f"couldn't compile regular expression pattern: {exc}") from None
    m = compiled.search(subject)
    for k, name in enumerate(names):
        value = ""
        if m is not None and k <= compiled.groups:
            value = m.group(k) or ""
        interp.set_var(name, value)
    return "1" if m else "0"


def cmd_info(interp, args):
    if not args:
        raise TclError('wrong # args: should be "info subcommand ?arg ...?"')
    if args[0] == "exists":
        _arity(args, 2, 2, "info exists varName")
        return "1" if interp.var_exists(args[1]) else "0"
    raise TclError(f'unknown or unsupported info subcommand "{args[0]}": must be exists')


BUILTINS: dict[str, Callable] = {
    "set": cmd_set,
    "puts": cmd_puts,
    "list": cmd_list,
    "lappend": cmd_lappend,
    "foreach": cmd_foreach,
    "for": cmd_for,
    "while": cmd_while,
    "if": cmd_if,
    "incr": cmd_incr,
    "proc": cmd_proc,
    "return": cmd_return,
    "catch": cmd_catch,
    "error": cmd_error,
    "break": cmd_break,
    "continue": cmd_continue,
    "switch": cmd_switch,
    "after": cmd_after,
    "expr": cmd_expr,
    "scan": cmd_scan,
    "regexp": cmd_regexp,
    "info": cmd_info,
}
