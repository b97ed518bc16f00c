"""Parser and canonical serializer for structured call lists.

The on-the-wire syntax is a bracketed list of keyword-argument calls::

    [weather_api.get_current_weather(location="Palo Alto", units="Celsius")]

Values are strings (single- or double-quoted), numbers, booleans
(``true``/``True``), ``null``/``None``, lists, and maps. The serializer emits
one canonical form (double quotes, lowercase keywords, ``", "`` separators,
no spaces around ``=``), and the parser accepts everything the serializer can
emit.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .core import FunctionCall, Value

DEFAULT_MAX_DEPTH = 32

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

_KEYWORD_VALUES = {
    "true": True,
    "True": True,
    "false": False,
    "False": False,
    "null": None,
    "None": None,
}

_ESCAPES = {
    '"': '"',
    "'": "'",
    "\\": "\\",
    "/": "/",
    "b": "\b",
    "f": "\f",
    "n": "\n",
    "r": "\r",
    "t": "\t",
}


class CallSyntaxError(ValueError):
    """Syntax error with the byte offset and the tokens that were expected."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        detail = f"at byte {offset}: {message}"
        if expected:
            detail += f" (expected {', '.join(expected)})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


@dataclass(frozen=True)
class CallListAst:
    """A parsed call list; order is meaningful."""

    calls: tuple[FunctionCall, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))


class _Parser:
    def __init__(self, text: str, max_depth: int):
        self.text = text
        self.pos = 0
        self.max_depth = max_depth

    def error(self, message: str, expected: tuple[str, ...] = (), pos: int | None = None):
        at = self.pos if pos is None else pos
        offset = len(self.text[:at].encode("utf-8"))
        raise CallSyntaxError(message, offset, expected)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, token: str):
        if not self.text.startswith(token, self.pos):
            self.error(f"found {self.peek()!r}" if self.peek() else "unexpected end of input",
                       expected=(repr(token),))
        self.pos += len(token)

    def parse_calls(self) -> CallListAst:
        self.skip_ws()
        self.expect("[")
        self.skip_ws()
        calls: list[FunctionCall] = []
        if self.peek() == "]":
            self.pos += 1
        else:
            while True:
                calls.append(self.parse_call())
                self.skip_ws()
                if self.peek() == ",":
                    self.pos += 1
                    self.skip_ws()
                elif self.peek() == "]":
                    self.pos += 1
                    break
                else:
                    self.error("call list not closed", expected=("','", "']'"))
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input after call list", expected=("end of input",))
        return CallListAst(tuple(calls))

    def parse_call(self) -> FunctionCall:
        name = self.parse_dotted_name()
        self.skip_ws()
        self.expect("(")
        self.skip_ws()
        arguments: dict[str, Value] = {}
        if self.peek() == ")":
            self.pos += 1
            return FunctionCall(name, arguments)
        while True:
            arg_start = self.pos
            arg_name = self.parse_name()
            if arg_name in arguments:
                self.error(f"duplicate argument name {arg_name!r}", pos=arg_start)
            self.skip_ws()
            self.expect("=")
            self.skip_ws()
            arguments[arg_name] = self.parse_value(depth=0)
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                self.skip_ws()
            elif self.peek() == ")":
                self.pos += 1
                break
            else:
                self.error("argument list not closed", expected=("','", "')'"))
        return FunctionCall(name, arguments)

    def parse_name(self) -> str:
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            self.error("expected identifier", expected=("identifier",))
        self.pos = m.end()
        return m.group()

    def parse_dotted_name(self) -> str:
        parts = [self.parse_name()]
        while self.peek() == ".":
            self.pos += 1
            parts.append(self.parse_name())
        return ".".join(parts)

    def parse_value(self, depth: int) -> Value:
        if depth > self.max_depth:
            self.error(f"nesting depth exceeds {self.max_depth}")
        ch = self.peek()
        if ch in "\"'":
            return self.parse_string()
        if ch == "[":
            return self.parse_list(depth)
        if ch == "{":
            return self.parse_map(depth)
        if ch.isdigit() or ch in "+-.":
            return self.parse_number()
        if ch.isalpha() or ch == "_":
            start = self.pos
            word = self.parse_name()
            if word in _KEYWORD_VALUES:
                return _KEYWORD_VALUES[word]
            self.error(f"bare identifier {word!r} is not a value", pos=start,
                       expected=("string", "number", "boolean", "null", "list", "map"))
        self.error("expected a value",
                   expected=("string", "number", "boolean", "null", "list", "map"))

    def parse_string(self) -> str:
        quote = self.peek()
        start = self.pos
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated string", pos=start)
            ch = self.text[self.pos]
            if ch == quote:
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.text):
                    self.error("unterminated escape", pos=start)
                esc = self.text[self.pos]
                if esc == "u":
                    hex_digits = self.text[self.pos + 1 : self.pos + 5]
                    if len(hex_digits) != 4 or not all(c in "0123456789abcdefABCDEF" for c in hex_digits):
                        self.error("invalid \\u escape", pos=self.pos - 1)
                    out.append(chr(int(hex_digits, 16)))
                    self.pos += 5
                elif esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    self.pos += 1
                else:
                    self.error(f"unknown escape \\{esc}", pos=self.pos - 1)
            else:
                out.append(ch)
                self.pos += 1

    def parse_number(self) -> int | float:
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            self.error("malformed number")
        token = m.group()
        self.pos = m.end()
        if "." in token or "e" in token or "E" in token:
            return float(token)
        return int(token)

    def parse_list(self, depth: int) -> list[Value]:
        self.expect("[")
        self.skip_ws()
        items: list[Value] = []
        if self.peek() == "]":
            self.pos += 1
            return items
        while True:
            items.append(self.parse_value(depth + 1))
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                self.skip_ws()
            elif self.peek() == "]":
                self.pos += 1
                return items
            else:
                self.error("list not closed", expected=("','", "']'"))

    def parse_map(self, depth: int) -> dict[str, Value]:
        self.expect("{")
        self.skip_ws()
        out: dict[str, Value] = {}
        if self.peek() == "}":
            self.pos += 1
            return out
        while True:
            key_start = self.pos
            if self.peek() not in "\"'":
                self.error("map keys must be quoted strings", expected=("string",))
            key = self.parse_string()
            if key in out:
                self.error(f"duplicate map key {key!r}", pos=key_start)
            self.skip_ws()
            self.expect(":")
            self.skip_ws()
            out[key] = self.parse_value(depth + 1)
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                self.skip_ws()
            elif self.peek() == "}":
                self.pos += 1
                return out
            else:
                self.error("map not closed", expected=("','", "'}'"))


def parse_calls(text: str, max_depth: int = DEFAULT_MAX_DEPTH) -> CallListAst:
    """Parse a call list; raises CallSyntaxError with a byte offset on failure."""
    return _Parser(text, max_depth).parse_calls()


def serialize_value(value: Value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r} has no call syntax")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(serialize_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(
            f"{json.dumps(k, ensure_ascii=False)}: {serialize_value(v)}" for k, v in value.items()
        ) + "}"
    raise TypeError(f"unsupported value type {type(value).__name__}")


def serialize_call(call: FunctionCall) -> str:
    args = ", ".join(f"{k}={serialize_value(v)}" for k, v in call.arguments.items())
    return f"{call.name}({args})"


def serialize_calls(ast: CallListAst) -> str:
    """Canonical text form; parse_calls(serialize_calls(a)) == a."""
    return "[" + ", ".join(serialize_call(c) for c in ast.calls) + "]"
