# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Code for parsing `.sdm` model files.
"""

from pathlib import Path

from .diagnostics import Diagnostic, Position
from .lexer import TokenKind, tokenize
from . import syntax
from . import util


DECLARATION_KEYWORDS = frozenset(
    [
        "dimension",
        "parameter",
        "lookup",
        "aux",
        "flow",
        "stock",
        "scenario",
        "equilibrium",
    ]
)

OVERLAY_SHAPES = frozenset(["step", "addStep", "scaleStep", "pulse", "ramp"])

EQUILIBRIUM_SETTINGS = frozenset(["tolerance", "damping", "iterations"])

COMPARISONS = {
    TokenKind.lt: "<",
    TokenKind.le: "<=",
    TokenKind.gt: ">",
    TokenKind.ge: ">=",
    TokenKind.eqeq: "==",
    TokenKind.ne: "!=",
}


class _ParseError(Exception):
    def __init__(self, diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


class _Parser:
    def __init__(self, tokens, source):
        self.tokens = tokens
        self.source = source
        self.pos = 0
        self.diagnostics = []

    # Token helpers

    @property
    def token(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def position(self, token=None):
        token = token or self.token
        return Position(self.source, token.line, token.column)

    def advance(self):
        token = self.token
        if token.kind is not TokenKind.eof:
            self.pos += 1
        return token

    def at(self, kind):
        return self.token.kind is kind

    def accept(self, kind):
        if self.at(kind):
            return self.advance()
        return None

    def fail(self, message, token=None):
        raise _ParseError(
            Diagnostic.error("SyntaxError", message, self.position(token))
        )

    def _found(self):
        token = self.token
        if token.kind is TokenKind.eof:
            return "end of file"
        return f"'{token.text}'"

    def expect(self, kind, what):
        if not self.at(kind):
            self.fail(f"expected {what}, found {self._found()}")
        return self.advance()

    def expect_keyword(self, word):
        if not self.token.is_keyword(word):
            self.fail(f"expected '{word}', found {self._found()}")
        return self.advance()

    def expect_ident(self, what="a name"):
        return self.expect(TokenKind.ident, what).text

    # Recovery

    def _starts_declaration(self, index, after_line):
        token = self.tokens[index]
        if token.kind is TokenKind.keyword and token.text in DECLARATION_KEYWORDS:
            return True
        if token.kind is TokenKind.ident and token.line > after_line:
            following = self.tokens[min(index + 1, len(self.tokens) - 1)]
            previous = self.tokens[index - 1]
            return (
                following.kind in (TokenKind.eq, TokenKind.lbracket)
                and previous.line < token.line
            )
        return False

    def synchronize(self, error_line):
        while self.token.kind is not TokenKind.eof:
            if self._starts_declaration(self.pos, error_line):
                return
            self.advance()

    # Declarations

    def parse_model(self):
        declarations = []
        while not self.at(TokenKind.eof):
            if self.accept(TokenKind.semi):
                continue
            start = self.pos
            try:
                declarations.append(self.parse_declaration())
            except _ParseError as e:
                self.diagnostics.append(e.diagnostic)
                if self.pos == start:
                    self.advance()
                self.synchronize(e.diagnostic.line)
        return syntax.SourceModel(
            tuple(declarations), self.source, self.token.comments
        )

    def parse_declaration(self):
        token = self.token
        if token.kind is TokenKind.keyword:
            handler = getattr(self, f"parse_{token.text}", None)
            if token.text in DECLARATION_KEYWORDS and handler is not None:
                return handler()
        if token.kind is TokenKind.ident:
            return self.parse_variable(None)
        self.fail(f"expected a declaration, found {self._found()}")

    def parse_dimension(self):
        start = self.expect_keyword("dimension")
        name = self.expect_ident("a dimension name")
        self.expect(TokenKind.eq, "'='")
        self.expect(TokenKind.lbrace, "'{'")
        elements = [self.expect_ident("an element name")]
        while self.accept(TokenKind.comma):
            elements.append(self.expect_ident("an element name"))
        self.expect(TokenKind.rbrace, "'}' to close the element list")
        return syntax.DimensionDecl(
            name, tuple(elements), self.position(start), start.comments
        )

    def parse_dims(self):
        if not self.accept(TokenKind.lbracket):
            return ()
        dims = [self.expect_ident("a dimension name")]
        while self.accept(TokenKind.comma):
            dims.append(self.expect_ident("a dimension name"))
        self.expect(TokenKind.rbracket, "']'")
        return tuple(dims)

    def parse_literal(self):
        start = self.token
        sign = -1.0 if self.accept(TokenKind.minus) else 1.0
        number = self.expect(TokenKind.number, "a number")
        text = number.text if sign > 0 else f"-{number.text}"
        return syntax.Number(sign * number.value, text, self.position(start))

    def parse_units(self):
        if self.token.is_keyword("units"):
            self.advance()
            return self.expect(TokenKind.string, "a units string").value
        return None

    def parse_parameter(self):
        start = self.expect_keyword("parameter")
        name = self.expect_ident("a parameter name")
        dims = self.parse_dims()
        self.expect(TokenKind.eq, "'='")
        value = None
        per_element = []
        if self.accept(TokenKind.lbrace):
            while True:
                element = self.expect_ident("an element name")
                self.expect(TokenKind.colon, "':'")
                per_element.append((element, self.parse_literal()))
                if not self.accept(TokenKind.comma):
                    break
            self.expect(TokenKind.rbrace, "'}' to close the element values")
        else:
            value = self.parse_literal()
        units = self.parse_units()
        return syntax.ParameterDecl(
            name,
            dims,
            value,
            tuple(per_element),
            units,
            self.position(start),
            start.comments,
        )

    def parse_lookup(self):
        start = self.expect_keyword("lookup")
        name = self.expect_ident("a lookup name")
        self.expect(TokenKind.eq, "'='")
        self.expect(TokenKind.lbracket, "'['")
        points = []
        while True:
            self.expect(TokenKind.lparen, "'(' to start a point")
            x = self.parse_literal()
            self.expect(TokenKind.comma, "','")
            y = self.parse_literal()
            self.expect(TokenKind.rparen, "')' to close the point")
            points.append((x, y))
            if not self.accept(TokenKind.comma):
                break
        self.expect(TokenKind.rbracket, "']' to close the lookup points")
        units = self.parse_units()
        return syntax.LookupDecl(
            name, tuple(points), units, self.position(start), start.comments
        )

    def parse_aux(self):
        return self.parse_variable("aux")

    def parse_flow(self):
        return self.parse_variable("flow")

    def parse_variable(self, keyword):
        start = self.token
        if keyword is not None:
            self.expect_keyword(keyword)
        name = self.expect_ident("a variable name")
        dims = self.parse_dims()
        self.expect(TokenKind.eq, "'='")
        equation = self.parse_expression()
        units = self.parse_units()
        return syntax.VariableDecl(
            keyword or "aux",
            name,
            dims,
            equation,
            units,
            keyword is not None,
            self.position(start),
            start.comments,
        )

    def parse_name_list(self):
        self.expect(TokenKind.lbracket, "'['")
        names = []
        if not self.at(TokenKind.rbracket):
            names.append(self.expect_ident())
            while self.accept(TokenKind.comma):
                names.append(self.expect_ident())
        self.expect(TokenKind.rbracket, "']' to close the list")
        return tuple(names)

    def parse_stock(self):
        start = self.expect_keyword("stock")
        name = self.expect_ident("a stock name")
        dims = self.parse_dims()
        self.expect(TokenKind.lbrace, "'{'")
        fields = {}
        while not self.accept(TokenKind.rbrace):
            token = self.token
            if self.accept(TokenKind.semi):
                continue
            if token.is_keyword("initial"):
                self.advance()
                self.expect(TokenKind.eq, "'='")
                fields["initial"] = self.parse_expression()
            elif token.is_keyword("inflows", "outflows"):
                self.advance()
                self.expect(TokenKind.eq, "'='")
                fields[token.text] = self.parse_name_list()
            elif token.is_keyword("nonneg"):
                self.advance()
                fields["nonneg"] = True
            elif token.is_keyword("upper"):
                self.advance()
                self.expect(TokenKind.eq, "'='")
                fields["upper"] = self.parse_literal()
            elif token.is_keyword("units"):
                fields["units"] = self.parse_units()
            else:
                self.fail(
                    f"expected '}}' to close stock '{name}', found {self._found()}"
                )
        return syntax.StockDecl(
            name,
            dims,
            position=self.position(start),
            comments=start.comments,
            **fields,
        )

    def parse_scenario(self):
        start = self.expect_keyword("scenario")
        name = self.expect_ident("a scenario name")
        self.expect(TokenKind.lbrace, "'{'")
        items = []
        while not self.accept(TokenKind.rbrace):
            if self.accept(TokenKind.semi):
                continue
            token = self.token
            if token.kind is not TokenKind.ident:
                self.fail(
                    f"expected '}}' to close scenario '{name}', found {self._found()}"
                )
            if self.peek().kind is TokenKind.lparen:
                items.append(self.parse_overlay())
            else:
                self.advance()
                self.expect(TokenKind.eq, "'(' or '='")
                items.append(
                    syntax.SwitchDecl(
                        token.text, self.parse_literal(), self.position(token)
                    )
                )
        return syntax.ScenarioDecl(
            name, tuple(items), self.position(start), start.comments
        )

    def parse_overlay(self):
        token = self.advance()
        if token.text not in OVERLAY_SHAPES:
            self.fail(
                f"unknown overlay shape '{token.text}', expected one of "
                f"{', '.join(sorted(OVERLAY_SHAPES))}",
                token,
            )
        self.expect(TokenKind.lparen, "'('")
        target = self.expect_ident("an overlay target")
        element = None
        if self.accept(TokenKind.lbracket):
            element = self.expect_ident("an element name")
            self.expect(TokenKind.rbracket, "']'")
        args = []
        while self.accept(TokenKind.comma):
            args.append(self.parse_literal())
        self.expect(TokenKind.rparen, "')' to close the overlay")
        return syntax.OverlayDecl(
            token.text, target, element, tuple(args), self.position(token)
        )

    def parse_equilibrium(self):
        start = self.expect_keyword("equilibrium")
        self.expect(TokenKind.lbrace, "'{'")
        targets = ()
        settings = []
        while not self.accept(TokenKind.rbrace):
            if self.accept(TokenKind.semi):
                continue
            token = self.token
            if token.kind is TokenKind.ident and token.text == "targets":
                self.advance()
                self.expect(TokenKind.eq, "'='")
                targets = self.parse_name_list()
            elif token.kind is TokenKind.ident and token.text in EQUILIBRIUM_SETTINGS:
                self.advance()
                self.expect(TokenKind.eq, "'='")
                settings.append((token.text, self.parse_literal()))
            else:
                self.fail(
                    f"expected '}}' to close the equilibrium block, "
                    f"found {self._found()}"
                )
        return syntax.EquilibriumDecl(
            targets, tuple(settings), self.position(start), start.comments
        )

    # Expressions, lowest precedence first

    def parse_expression(self):
        token = self.token
        if token.is_keyword("if"):
            self.advance()
            condition = self.parse_expression()
            self.expect_keyword("then")
            then = self.parse_expression()
            self.expect_keyword("else")
            otherwise = self.parse_expression()
            return syntax.Conditional(condition, then, otherwise, self.position(token))
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        op = COMPARISONS.get(self.token.kind)
        if op is None:
            return left
        token = self.advance()
        right = self.parse_additive()
        return syntax.Binary(op, left, right, self.position(token))

    def parse_additive(self):
        left = self.parse_term()
        while self.at(TokenKind.plus) or self.at(TokenKind.minus):
            token = self.advance()
            right = self.parse_term()
            left = syntax.Binary(token.text, left, right, self.position(token))
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.at(TokenKind.star) or self.at(TokenKind.slash):
            token = self.advance()
            right = self.parse_unary()
            left = syntax.Binary(token.text, left, right, self.position(token))
        return left

    def parse_unary(self):
        if self.at(TokenKind.minus):
            token = self.advance()
            return syntax.Unary("-", self.parse_unary(), self.position(token))
        return self.parse_power()

    def parse_power(self):
        base = self.parse_primary()
        if self.at(TokenKind.caret):
            token = self.advance()
            exponent = self.parse_unary()
            return syntax.Binary("^", base, exponent, self.position(token))
        return base

    def parse_primary(self):
        token = self.token
        if token.kind is TokenKind.number:
            self.advance()
            return syntax.Number(token.value, token.text, self.position(token))
        if token.kind is TokenKind.lparen:
            self.advance()
            inner = self.parse_expression()
            self.expect(TokenKind.rparen, "')'")
            return inner
        if token.kind is TokenKind.ident:
            self.advance()
            if self.accept(TokenKind.lparen):
                args = []
                if not self.at(TokenKind.rparen):
                    args.append(self.parse_expression())
                    while self.accept(TokenKind.comma):
                        args.append(self.parse_expression())
                self.expect(TokenKind.rparen, "')' to close the call")
                return syntax.Call(token.text, tuple(args), self.position(token))
            subscripts = ()
            if self.accept(TokenKind.lbracket):
                subscripts = [self.parse_subscript()]
                while self.accept(TokenKind.comma):
                    subscripts.append(self.parse_subscript())
                self.expect(TokenKind.rbracket, "']'")
                subscripts = tuple(subscripts)
            return syntax.Reference(token.text, subscripts, self.position(token))
        self.fail(f"expected an expression, found {self._found()}")

    def parse_subscript(self):
        if self.accept(TokenKind.star):
            return "*"
        return self.expect_ident("an element, '*' or a dimension name")


@util.keep_value
def parse(tokens, source="<string>"):
    """
    Parse a token list from `lexer.tokenize` into a `syntax.SourceModel`.

    The parser recovers at declaration boundaries, so every syntax error in
    the file is reported.  The result is a generator over the diagnostics;
    the model is on `.value`.
    """
    parser = _Parser(tokens, source)
    model = parser.parse_model()
    yield from parser.diagnostics
    return model


@util.keep_value
def parse_text(text, source="<string>"):
    """
    Tokenize and parse the text of one model file.
    """
    tokens = yield from tokenize(text, source)
    model = yield from parse(tokens, source)
    return model


@util.keep_value
def parse_files(filepaths):
    """
    Parse one or more `.sdm` files, merging their declarations into a single
    `syntax.SourceModel` in file order.

    The result is a generator over diagnostics.  If there are no errors, the
    merged model can be obtained from `result.value`.  For example::

      result = parser.parse_files(filepaths)
      for diagnostic in result:
          print(diagnostic)
      source_model = result.value

    :param filepaths: list of Path objects to `.sdm` files
    :raises OSError: a file can not be read.
    """
    declarations = []
    trailing = []
    names = []
    for filepath in util.ensure_list(filepaths):
        filepath = Path(filepath)
        text = filepath.read_text(encoding="utf-8")
        model = yield from parse_text(text, str(filepath))
        names.append(str(filepath))
        declarations.extend(model.declarations)
        trailing.extend(model.trailing_comments)

    return syntax.SourceModel(tuple(declarations), ", ".join(names), tuple(trailing))
