"""Game description files and profile text.

A game file is line oriented::

    # comment
    game p1 decision moves=H,T payoff=0
    game g2 conditioned obs=E,NE moves=E,NE payoff=1
    game i identity states=a,b
    game s structural map=a:b,b:a
    compose (par p1 p2)
    state *
    utility (H, T) = (1, -1)

Parsing checks syntax and then validates by building the composed game,
so every error carries the line and column it was found at.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union
import json
import re

from probgames.compose import DecompositionWitness, par, seq
from probgames.dist import (
    ConvexAlgebra, Dist, ProductAlgebra, RationalVec, UnitAlgebra, VectorAlgebra, dist_new,
    ell, eta, marginals,
)
from probgames.errors import DistributionError, GameError, ParseError, ValidationError
from probgames.game import (
    DEFAULT_MAX_CONDITIONED_TABLE, ParNode, ProbOpenGame, SeqNode, conditioned_decision_game,
    decision_game, identity_game, leaf_games, strategy_label, structural_game,
)
from probgames.utils import UNIT, flatten, format_fraction, parse_fraction

KINDS = ("decision", "conditioned", "identity", "structural")

_TOKEN = re.compile(r"\s*(?:(?P<punct>[(),=:;])|(?P<word>[^\s(),=:;]+))")


@dataclass(frozen=True)
class Token:
    text: str
    column: int
    punct: bool = False


def tokenize(text: str, line: int = 1) -> List[Token]:
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TOKEN.match(stripped, pos)
        if match is None:
            raise ParseError(f"Unexpected character {stripped[pos]!r}", line, pos + 1)
        kind = "punct" if match.group("punct") else "word"
        tokens.append(Token(match.group(kind), match.start(kind) + 1, kind == "punct"))
        pos = match.end()
    return tokens


class _Cursor:
    """Token stream of one line."""

    def __init__(self, tokens: List[Token], line: int, end_column: int):
        self.tokens = tokens
        self.line = line
        self.end_column = end_column
        self.pos = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def column(self) -> int:
        token = self.peek()
        return token.column if token else self.end_column

    def next(self, what: str) -> Token:
        token = self.peek()
        if token is None:
            raise ParseError(f"Expected {what} but the line ended", self.line, self.end_column)
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.next(repr(text))
        if token.text != text:
            raise ParseError(f"Expected {text!r} but found {token.text!r}", self.line, token.column)
        return token

    def word(self, what: str) -> Token:
        token = self.next(what)
        if token.punct:
            raise ParseError(f"Expected {what} but found {token.text!r}", self.line, token.column)
        return token

    def finish(self) -> None:
        token = self.peek()
        if token is not None:
            raise ParseError(f"Unexpected {token.text!r}", self.line, token.column)


@dataclass(frozen=True)
class GameDecl:
    name: str
    kind: str
    moves: Tuple[str, ...] = ()
    observations: Tuple[str, ...] = ()
    payoff: Optional[int] = None
    states: Tuple[str, ...] = ()
    mapping: Tuple[Tuple[str, str], ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Leaf:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Node:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Expr = Union[Leaf, Node]


@dataclass(frozen=True)
class UtilityRow:
    move: Tuple[str, ...]
    value: Tuple[Fraction, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GameExpr:
    declarations: Tuple[GameDecl, ...]
    composition: Expr
    utility: Tuple[UtilityRow, ...]
    state: Optional[Tuple[str, ...]] = None
    compose_line: int = field(default=0, compare=False)
    state_line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BuiltGame:
    game: ProbOpenGame
    k: Dict
    state: object
    leaves: Tuple[ProbOpenGame, ...]


def _word_list(cursor: _Cursor, what: str) -> Tuple[str, ...]:
    words = [cursor.word(what).text]
    while cursor.peek() is not None and cursor.peek().text == ",":
        cursor.next(",")
        words.append(cursor.word(what).text)
    if len(set(words)) != len(words):
        raise ValidationError(f"Repeated entry in {what} list", cursor.line, cursor.column())
    return tuple(words)


def _tuple_words(cursor: _Cursor) -> Tuple[str, ...]:
    """A possibly nested parenthesized tuple of labels, flattened; ``*`` stands for the singleton."""
    token = cursor.peek()
    if token is not None and token.text == "(":
        cursor.next("(")
        words: List[str] = []
        if cursor.peek() is not None and cursor.peek().text == ")":
            cursor.next(")")
            return ()
        while True:
            words.extend(_tuple_words(cursor))
            sep = cursor.next("',' or ')'")
            if sep.text == ")":
                return tuple(words)
            if sep.text != ",":
                raise ParseError(f"Expected ',' or ')' but found {sep.text!r}", cursor.line, sep.column)
    word = cursor.word("a label")
    return () if word.text == "*" else (word.text,)


def _rational(cursor: _Cursor) -> Fraction:
    token = cursor.word("a rational number")
    try:
        return parse_fraction(token.text)
    except ValueError as exc:
        raise ParseError(str(exc), cursor.line, token.column)


def _parse_decl(cursor: _Cursor) -> GameDecl:
    name = cursor.word("a game name").text
    kind_token = cursor.word("a game kind")
    kind = kind_token.text
    if kind not in KINDS:
        raise ParseError(f"Unknown game kind {kind!r}; expected one of {', '.join(KINDS)}",
                         cursor.line, kind_token.column)
    fields: Dict[str, object] = {}
    while not cursor.at_end():
        key = cursor.word("a field name")
        cursor.expect("=")
        if key.text in fields:
            raise ParseError(f"Field {key.text!r} given twice", cursor.line, key.column)
        if key.text in ("moves", "obs", "states"):
            fields[key.text] = _word_list(cursor, key.text)
        elif key.text == "payoff":
            token = cursor.word("a payoff index")
            if not token.text.isdigit():
                raise ParseError(f"Payoff index must be a non-negative integer, got {token.text!r}",
                                 cursor.line, token.column)
            fields["payoff"] = int(token.text)
        elif key.text == "map":
            pairs = []
            while True:
                source = cursor.word("a state").text
                cursor.expect(":")
                pairs.append((source, cursor.word("a state").text))
                if cursor.peek() is None or cursor.peek().text != ",":
                    break
                cursor.next(",")
            fields["map"] = tuple(pairs)
        else:
            raise ParseError(f"Unknown field {key.text!r}", cursor.line, key.column)

    required = {
        "decision": ("moves", "payoff"),
        "conditioned": ("obs", "moves", "payoff"),
        "identity": ("states",),
        "structural": ("map",),
    }[kind]
    for key in required:
        if key not in fields:
            raise ParseError(f"{kind} game {name} needs {key}=", cursor.line, cursor.end_column)
    extra = set(fields) - set(required)
    if extra:
        raise ParseError(f"{kind} game {name} does not take {sorted(extra)[0]}=", cursor.line, kind_token.column)
    return GameDecl(
        name=name,
        kind=kind,
        moves=fields.get("moves", ()),
        observations=fields.get("obs", ()),
        payoff=fields.get("payoff"),
        states=fields.get("states", ()),
        mapping=fields.get("map", ()),
        line=cursor.line,
    )


def _parse_expr(cursor: _Cursor) -> Expr:
    token = cursor.next("a game expression")
    if token.text == "(":
        op = cursor.word("'par' or 'seq'")
        if op.text not in ("par", "seq"):
            raise ParseError(f"Expected 'par' or 'seq' but found {op.text!r}", cursor.line, op.column)
        left = _parse_expr(cursor)
        right = _parse_expr(cursor)
        cursor.expect(")")
        return Node(op.text, left, right, cursor.line, token.column)
    if token.punct:
        raise ParseError(f"Unexpected {token.text!r} in game expression", cursor.line, token.column)
    return Leaf(token.text, cursor.line, token.column)


def _parse_utility(cursor: _Cursor) -> UtilityRow:
    move = _tuple_words(cursor)
    cursor.expect("=")
    cursor.expect("(")
    values = [_rational(cursor)]
    while True:
        sep = cursor.next("',' or ')'")
        if sep.text == ")":
            break
        if sep.text != ",":
            raise ParseError(f"Expected ',' or ')' but found {sep.text!r}", cursor.line, sep.column)
        values.append(_rational(cursor))
    return UtilityRow(move, tuple(values), cursor.line)


def _syntax(text: str) -> GameExpr:
    declarations: List[GameDecl] = []
    utility: List[UtilityRow] = []
    composition = None
    compose_line = 0
    state = None
    state_line = 0
    last_line = 1
    for number, raw in enumerate(text.splitlines(), start=1):
        last_line = number
        line = raw.split("#", 1)[0]
        tokens = tokenize(line, number)
        if not tokens:
            continue
        cursor = _Cursor(tokens[1:], number, len(line.rstrip()) + 1)
        keyword = tokens[0]
        if keyword.text == "game":
            declarations.append(_parse_decl(cursor))
        elif keyword.text == "compose":
            if composition is not None:
                raise ParseError("Only one compose line is allowed", number, keyword.column)
            composition = _parse_expr(cursor)
            compose_line = number
        elif keyword.text == "state":
            if state is not None:
                raise ParseError("Only one state line is allowed", number, keyword.column)
            state = _tuple_words(cursor)
            state_line = number
        elif keyword.text == "utility":
            utility.append(_parse_utility(cursor))
        else:
            raise ParseError(f"Unknown section {keyword.text!r}; expected game, compose, state or utility",
                             number, keyword.column)
        cursor.finish()
    if composition is None:
        raise ParseError("Missing compose line", last_line, 1)
    return GameExpr(tuple(declarations), composition, tuple(utility), state, compose_line, state_line)


def _leaf_names(expr: Expr) -> List[Leaf]:
    if isinstance(expr, Leaf):
        return [expr]
    return _leaf_names(expr.left) + _leaf_names(expr.right)


def _broadcast(alg: ConvexAlgebra, vector: Tuple[Fraction, ...]):
    if isinstance(alg, ProductAlgebra):
        return (_broadcast(alg.left, vector), _broadcast(alg.right, vector))
    if isinstance(alg, UnitAlgebra):
        return UNIT
    return RationalVec(vector)


def _dimension(expr: GameExpr) -> int:
    dims = {len(row.value) for row in expr.utility}
    if len(dims) > 1:
        row = next(r for r in expr.utility if len(r.value) != len(expr.utility[0].value))
        raise ValidationError(
            f"Utility vector has {len(row.value)} entries, expected {len(expr.utility[0].value)}", row.line, 1)
    return dims.pop() if dims else 2


def _build_leaf(decl: GameDecl, alg: VectorAlgebra, max_conditioned: int) -> ProbOpenGame:
    if decl.payoff is not None and decl.payoff >= alg.dim:
        raise ValidationError(
            f"Payoff index {decl.payoff} of {decl.name} is outside the {alg.dim}-entry utility vectors", decl.line, 1)
    try:
        if decl.kind == "decision":
            return decision_game(decl.moves, decl.payoff, alg, name=decl.name)
        if decl.kind == "conditioned":
            return conditioned_decision_game(decl.observations, decl.moves, decl.payoff, alg,
                                             name=decl.name, max_table=max_conditioned)
        if decl.kind == "identity":
            return identity_game(decl.states, alg, name=decl.name)
        return structural_game(dict(decl.mapping), lambda r: r, [s for s, _ in decl.mapping], alg, name=decl.name)
    except GameError as exc:
        raise ValidationError(str(exc), decl.line, 1)


def build(expr: GameExpr, max_conditioned: int = DEFAULT_MAX_CONDITIONED_TABLE) -> BuiltGame:
    """
    Builds the composed game, its utility table and its initial state.

    Raises:
        ValidationError: For unknown or repeated names, interface mismatches,
            non-total or unknown utility rows and unknown states
    """
    decls: Dict[str, GameDecl] = {}
    for decl in expr.declarations:
        if decl.name in decls:
            raise ValidationError(f"Game {decl.name} is declared twice", decl.line, 1)
        decls[decl.name] = decl

    seen = set()
    for leaf in _leaf_names(expr.composition):
        if leaf.name not in decls:
            raise ValidationError(f"Unknown game name {leaf.name!r}", leaf.line, leaf.column)
        if leaf.name in seen:
            raise ValidationError(f"Game {leaf.name} is used more than once", leaf.line, leaf.column)
        seen.add(leaf.name)

    alg = VectorAlgebra(_dimension(expr))
    built = {name: _build_leaf(decl, alg, max_conditioned) for name, decl in decls.items() if name in seen}

    def combine(node: Expr) -> ProbOpenGame:
        if isinstance(node, Leaf):
            return built[node.name]
        left, right = combine(node.left), combine(node.right)
        try:
            return par(left, right) if node.op == "par" else seq(left, right)
        except GameError as exc:
            raise ValidationError(str(exc), node.line, node.column)

    game = combine(expr.composition)

    by_words: Dict[Tuple[str, ...], object] = {}
    for y in game.moves:
        by_words[tuple(strategy_label(v) for v in flatten(y))] = y
    k: Dict = {}
    for row in expr.utility:
        y = by_words.get(row.move)
        if y is None:
            raise ValidationError(f"Utility row for unknown move ({', '.join(row.move)})", row.line, 1)
        if y in k:
            raise ValidationError(f"Utility row for ({', '.join(row.move)}) is given twice", row.line, 1)
        k[y] = _broadcast(game.utility_alg, row.value)
    missing = [words for words, y in by_words.items() if y not in k]
    if missing:
        raise ValidationError(f"Utility table is not total: missing ({', '.join(missing[0])})",
                              expr.compose_line, 1)

    if expr.state is None:
        if len(game.states) != 1:
            raise ValidationError("The composed game has several states; add a state line", expr.compose_line, 1)
        state = game.states[0]
    else:
        matches = [x for x in game.states if tuple(strategy_label(v) for v in flatten(x)) == expr.state]
        if not matches:
            raise ValidationError(f"Unknown state ({', '.join(expr.state)})", expr.state_line, 1)
        state = matches[0]
    return BuiltGame(game, k, state, tuple(leaf_games(game)))


def parse_game_file(text: str, max_conditioned: int = DEFAULT_MAX_CONDITIONED_TABLE) -> GameExpr:
    """
    Parses and validates a game description.

    Args:
        text: File contents
        max_conditioned: Largest observation-by-move table of a conditioned game

    Returns:
        GameExpr: The validated description

    Raises:
        ParseError: On syntax errors
        ValidationError: On semantic errors
    """
    expr = _syntax(text)
    build(expr, max_conditioned)
    return expr


def _format_words(words: Sequence[str]) -> str:
    return "(" + ", ".join(words) + ")"


def _format_expr(expr: Expr) -> str:
    if isinstance(expr, Leaf):
        return expr.name
    return f"({expr.op} {_format_expr(expr.left)} {_format_expr(expr.right)})"


def serialize(expr: GameExpr) -> str:
    lines = []
    for decl in expr.declarations:
        head = f"game {decl.name} {decl.kind}"
        if decl.kind == "decision":
            lines.append(f"{head} moves={','.join(decl.moves)} payoff={decl.payoff}")
        elif decl.kind == "conditioned":
            lines.append(f"{head} obs={','.join(decl.observations)} moves={','.join(decl.moves)} payoff={decl.payoff}")
        elif decl.kind == "identity":
            lines.append(f"{head} states={','.join(decl.states)}")
        else:
            lines.append(f"{head} map={','.join(f'{a}:{b}' for a, b in decl.mapping)}")
    lines.append(f"compose {_format_expr(expr.composition)}")
    if expr.state is not None:
        lines.append(f"state {_format_words(expr.state) if expr.state else '*'}")
    for row in expr.utility:
        values = ", ".join(format_fraction(v) for v in row.value)
        lines.append(f"utility {_format_words(row.move)} = ({values})")
    return "\n".join(lines) + "\n"


def strategy_text(sigma) -> str:
    """Label of a (possibly joint) strategy, with the singleton strategy omitted."""
    labels = [strategy_label(v) for v in flatten(sigma)]
    if len(labels) == 1:
        return labels[0]
    return _format_words(labels)


def _weights(cursor: _Cursor, what: str) -> List[Tuple[Tuple[str, ...], Fraction, int]]:
    entries = []
    while True:
        column = cursor.column()
        label = _tuple_words(cursor)
        cursor.expect("=")
        entries.append((label, _rational(cursor), column))
        token = cursor.peek()
        if token is None or token.text != ",":
            return entries
        cursor.next(",")


def _make_dist(entries, lookup: Dict[Tuple[str, ...], object], owner: str, line: int) -> Dist:
    pairs = []
    for label, weight, column in entries:
        if label not in lookup:
            raise ValidationError(f"Unknown strategy {' '.join(label) or '*'} of {owner}", line, column)
        pairs.append((lookup[label], weight))
    try:
        return dist_new(pairs)
    except DistributionError as exc:
        raise ValidationError(f"{owner}: {exc}", line, 1)


def _labels_of(game: ProbOpenGame) -> Dict[Tuple[str, ...], object]:
    return {tuple(strategy_label(v) for v in flatten(s)): s for s in game.strategies}


def parse_profile(text: str, built: BuiltGame) -> Dist:
    """
    Parses ``p1: H=1/2,T=1/2; p2: H=1`` into the independent product of
    the per-component distributions, formed along the composition tree.

    Components with a single strategy may be omitted.
    """
    cursor = _Cursor(tokenize(text), 1, len(text.rstrip()) + 1)
    leaves = {leaf.name: leaf for leaf in built.leaves}
    components: Dict[str, Dist] = {}
    while not cursor.at_end():
        name = cursor.word("a component name")
        if name.text not in leaves:
            raise ValidationError(f"Unknown component {name.text!r}", 1, name.column)
        if name.text in components:
            raise ValidationError(f"Component {name.text} is given twice", 1, name.column)
        cursor.expect(":")
        components[name.text] = _make_dist(_weights(cursor, name.text), _labels_of(leaves[name.text]),
                                           name.text, 1)
        if not cursor.at_end():
            cursor.expect(";")
    for leaf in built.leaves:
        if leaf.name not in components:
            if len(leaf.strategies) != 1:
                raise ValidationError(f"Profile has no component for {leaf.name}", 1, cursor.end_column)
            components[leaf.name] = eta(leaf.strategies[0])

    def combine(game: ProbOpenGame) -> Dist:
        spec = game.eq
        if isinstance(spec, ParNode):
            return ell(combine(spec.left), combine(spec.right))
        if isinstance(spec, SeqNode):
            return ell(combine(spec.first), combine(spec.second))
        return components[game.name]

    return combine(built.game)


def parse_joint(text: str, built: BuiltGame) -> Dist:
    """Parses a joint distribution such as ``(H, H)=1/2; (T, T)=1/2``."""
    cursor = _Cursor(tokenize(text), 1, len(text.rstrip()) + 1)
    entries = []
    while not cursor.at_end():
        entries.extend(_weights(cursor, "joint"))
        if not cursor.at_end():
            cursor.expect(";")
    if not entries:
        raise ParseError("Empty joint distribution", 1, 1)
    return _make_dist(entries, _labels_of(built.game), built.game.name, 1)


def parse_witness(text: str, built: BuiltGame) -> DecompositionWitness:
    """
    Parses a JSON witness for the outermost sequential composition:
    ``{"E": {"swap": "1"}, "NE": {"id": "1/2", "swap": "1/2"}}``.
    """
    spec = built.game.eq
    if not isinstance(spec, SeqNode):
        raise ValidationError("A witness needs a sequential composition at the top", 1, 1)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Witness is not valid JSON: {exc.msg}", exc.lineno, exc.colno)
    if not isinstance(raw, dict):
        raise ValidationError("Witness must be a JSON object keyed by branch", 1, 1)

    second = spec.second
    states = {tuple(strategy_label(v) for v in flatten(y)): y for y in second.states}
    strategies = _labels_of(second)
    branches = {}
    for key, inner in raw.items():
        words = _tuple_words(_Cursor(tokenize(key), 1, len(key) + 1))
        if words not in states:
            raise ValidationError(f"Witness branch {key!r} is not a state of {second.name}", 1, 1)
        if not isinstance(inner, dict):
            raise ValidationError(f"Witness branch {key!r} must map strategies to weights", 1, 1)
        entries = []
        for label, weight in inner.items():
            try:
                value = parse_fraction(str(weight))
            except ValueError as exc:
                raise ValidationError(str(exc), 1, 1)
            entries.append((_tuple_words(_Cursor(tokenize(label), 1, len(label) + 1)), value, 1))
        branches[states[words]] = _make_dist(entries, strategies, second.name, 1)
    return DecompositionWitness(branches)


def factor_profile(built: BuiltGame, phi: Dist) -> List[Tuple[str, Dist]]:
    """Per-leaf marginals of a profile, in composition order."""

    def split(game: ProbOpenGame, d: Dist) -> List[Tuple[str, Dist]]:
        spec = game.eq
        if isinstance(spec, (ParNode, SeqNode)):
            left, right = (spec.left, spec.right) if isinstance(spec, ParNode) else (spec.first, spec.second)
            first, rest = marginals(d)
            return split(left, first) + split(right, rest)
        return [(game.name, d)]

    return split(built.game, phi)


def format_profile(built: BuiltGame, phi: Dist) -> str:
    return "; ".join(f"{name}: {d}" for name, d in factor_profile(built, phi))
