"""Parser and evaluator for scalar functions of n real variables.

Grammar (no implicit multiplication, whitespace ignored):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right-associative, binds above '-'
    primary := number | variable | call | '(' expr ')'
    call    := ('sin'|'cos'|'exp'|'log'|'sqrt'|'abs') '(' expr ')'
             | ('min'|'max') '(' expr ',' expr ')'

Numbers are decimal or scientific; variables are x1..xn only.
"""

import math

import numpy as np

from .errors import DomainError

_FUNCTIONS_1 = {"sin", "cos", "exp", "log", "sqrt", "abs"}
_FUNCTIONS_2 = {"min", "max"}


class ExprSyntaxError(Exception):
    """Malformed source; `position` is the 0-based offset of the problem."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifier(Exception):
    def __init__(self, name, position):
        super().__init__(f"unknown identifier '{name}' (at position {position})")
        self.name = name
        self.position = position


class IndexOutOfRange(Exception):
    def __init__(self, name, index, n, position):
        super().__init__(
            f"variable '{name}' out of range: index {index} not in 1..{n}"
        )
        self.index = index
        self.position = position


# AST nodes: ("num", value) | ("var", index0) | ("neg", a)
#          | ("bin", op, a, b) | ("call", name, args tuple)


class Expression:
    """Immutable parsed expression over variables x1..xn."""

    def __init__(self, ast, dimension, source=None):
        self.ast = ast
        self.dimension = dimension
        self.source = source

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"Expression({to_source(self)!r}, n={self.dimension})"


class _Tokenizer:
    def __init__(self, source):
        self.src = source
        self.pos = 0
        self.tokens = []
        self._run()

    def _run(self):
        src, i, n = self.src, 0, len(self.src)
        while i < n:
            ch = src[i]
            if ch.isspace():
                i += 1
                continue
            if ch in "+-*/^(),":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                while j < n and (src[j].isdigit() or src[j] == "."):
                    j += 1
                if j < n and src[j] in "eE":
                    k = j + 1
                    if k < n and src[k] in "+-":
                        k += 1
                    if k < n and src[k].isdigit():
                        j = k
                        while j < n and src[j].isdigit():
                            j += 1
                text = src[i:j]
                try:
                    value = float(text)
                except ValueError:
                    raise ExprSyntaxError(f"bad number '{text}'", i) from None
                self.tokens.append(("num", value, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (src[j].isalnum() or src[j] == "_"):
                    j += 1
                self.tokens.append(("ident", src[i:j], i))
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character '{ch}'", i)
        self.tokens.append(("end", None, n))


class _Parser:
    def __init__(self, source, n):
        self.n = n
        self.tokens = _Tokenizer(source).tokens
        self.idx = 0

    def peek(self):
        return self.tokens[self.idx]

    def take(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected '{kind}', found '{tok[1]}'", tok[2])
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected trailing input '{tok[1]}'", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        node = self.primary()
        if self.peek()[0] == "^":
            self.take()
            # right operand at unary level: x^-2 parses, -x^2 == -(x^2)
            node = ("bin", "^", node, self.unary())
        return node

    def primary(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return ("num", value)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            return self.identifier(value, pos)
        raise ExprSyntaxError(f"expected a value, found '{value}'", pos)

    def identifier(self, name, pos):
        if name in _FUNCTIONS_1 or name in _FUNCTIONS_2:
            self.expect("(")
            first = self.expr()
            if name in _FUNCTIONS_2:
                self.expect(",")
                second = self.expr()
                self.expect(")")
                return ("call", name, (first, second))
            self.expect(")")
            return ("call", name, (first,))
        if name.startswith("x") and name[1:].isdigit():
            index = int(name[1:])
            if not 1 <= index <= self.n:
                raise IndexOutOfRange(name, index, self.n, pos)
            return ("var", index - 1)
        raise UnknownIdentifier(name, pos)


def parse(source, n):
    """Parse `source` into an Expression over x1..xn."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    ast = _Parser(source, n).parse()
    return Expression(ast, n, source=source)


def _eval_scalar(node, x):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return float(x[node[1]])
    if kind == "neg":
        return -_eval_scalar(node[1], x)
    if kind == "bin":
        op, left, right = node[1], node[2], node[3]
        a = _eval_scalar(left, x)
        b = _eval_scalar(right, x)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise DomainError("division by zero", _node_source(node))
            return a / b
        # op == "^"
        try:
            return math.pow(a, b)
        except OverflowError:
            return math.inf if a > 1 or (a < -1 and b % 2 == 0) else -math.inf
        except ValueError:
            reason = (
                "zero raised to a negative power"
                if a == 0.0
                else "fractional power of a negative base"
            )
            raise DomainError(reason, _node_source(node)) from None
    # kind == "call"
    name, args = node[1], node[2]
    a = _eval_scalar(args[0], x)
    if name == "sin":
        return math.sin(a)
    if name == "cos":
        return math.cos(a)
    if name == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    if name == "log":
        if a <= 0.0:
            raise DomainError("log of a non-positive value", _node_source(node))
        return math.log(a)
    if name == "sqrt":
        if a < 0.0:
            raise DomainError("sqrt of a negative value", _node_source(node))
        return math.sqrt(a)
    if name == "abs":
        return abs(a)
    b = _eval_scalar(args[1], x)
    return min(a, b) if name == "min" else max(a, b)


def evaluate(e, x):
    """Value of the expression at x (length n), IEEE semantics; raises
    DomainError for log/sqrt outside their domain and division by zero."""
    if len(x) != e.dimension:
        raise ValueError(
            f"point has length {len(x)}, expression has dimension {e.dimension}"
        )
    return _eval_scalar(e.ast, x)


def _eval_batch(node, X):
    kind = node[0]
    if kind == "num":
        return np.full(X.shape[0], node[1])
    if kind == "var":
        return X[:, node[1]]
    if kind == "neg":
        return -_eval_batch(node[1], X)
    if kind == "bin":
        op = node[1]
        a = _eval_batch(node[2], X)
        b = _eval_batch(node[3], X)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return np.power(a, b)
    name, args = node[1], node[2]
    a = _eval_batch(args[0], X)
    if name in ("min", "max"):
        b = _eval_batch(args[1], X)
        return np.minimum(a, b) if name == "min" else np.maximum(a, b)
    fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log,
          "sqrt": np.sqrt, "abs": np.abs}[name]
    return fn(a)


def evaluate_batch(e, X):
    """Evaluate at each row of X (shape (m, n)).  Out-of-domain rows come
    back non-finite (nan/inf) instead of raising; callers treat those as
    skipped points."""
    X = np.asarray(X, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval_batch(e.ast, X)
    return np.asarray(out, dtype=float)


def gradient_fd(e, x, h=1e-5):
    """Central finite-difference gradient, component i equal to
    (e(x + h e_i) - e(x - h e_i)) / (2 h)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x = [float(v) for v in x]
    grad = []
    for i in range(e.dimension):
        xp = list(x)
        xm = list(x)
        xp[i] += h
        xm[i] -= h
        grad.append((evaluate(e, xp) - evaluate(e, xm)) / (2.0 * h))
    return grad


def to_source(e_or_node):
    """Fully parenthesized text form; reparsing evaluates identically."""
    node = e_or_node.ast if isinstance(e_or_node, Expression) else e_or_node
    return _node_source(node)


def _node_source(node):
    kind = node[0]
    if kind == "num":
        return repr(node[1])
    if kind == "var":
        return f"x{node[1] + 1}"
    if kind == "neg":
        return f"(-{_node_source(node[1])})"
    if kind == "bin":
        return f"({_node_source(node[2])} {node[1]} {_node_source(node[3])})"
    args = ", ".join(_node_source(a) for a in node[2])
    return f"{node[1]}({args})"
