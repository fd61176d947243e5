"""S表达式查询语法解析器

    query := expr
    expr  := proj | conj | disj | neg
    proj  := "(P" INT "(f" slot (REL slot)* "))"
    slot  := LABEL | "?" | "(var" expr ")"
    conj  := "(and" expr expr+ ")"
    disj  := "(or" expr expr+ ")"
    neg   := "(not" expr ")"

INT 为 "?" 在实体槽中的1起始位置。
"""

import json
import re
from typing import List, NamedTuple, Optional

from ..graph.store import HyperGraph
from ..utils.exceptions import MultipleTargetsError, QuerySyntaxError
from .ast import And, Anchor, Not, Or, Projection, Target, Var, validate_ast

_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|([^\s()"]+))')


class Token(NamedTuple):
    kind: str  # "(" | ")" | "atom" | "string"
    text: str
    offset: int  # UTF-8 字节偏移


def tokenize(text: str) -> List[Token]:
    """切分记号并记录字节偏移"""
    tokens: List[Token] = []
    position = 0
    byte_offset = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            if not text[position:].strip():
                break
            start = position + (len(text[position:]) - len(text[position:].lstrip()))
            raise QuerySyntaxError(
                f"无法识别的字符 {text[start]!r}",
                byte_offset + len(text[position:start].encode('utf-8')),
            )
        start = match.start(match.lastindex)
        offset = byte_offset + len(text[position:start].encode('utf-8'))
        if match.group(1):
            tokens.append(Token("(", "(", offset))
        elif match.group(2):
            tokens.append(Token(")", ")", offset))
        elif match.group(3):
            tokens.append(Token("string", match.group(3), offset))
        else:
            tokens.append(Token("atom", match.group(4), offset))
        byte_offset += len(text[position:match.end()].encode('utf-8'))
        position = match.end()
    if text[position:].strip():
        raise QuerySyntaxError("存在无法解析的尾部内容", byte_offset)
    return tokens


class _Parser:
    def __init__(self, text: str, graph: Optional[HyperGraph]):
        self.tokens = tokenize(text)
        self.index = 0
        self.end_offset = len(text.encode('utf-8'))
        self.graph = graph

    def peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def next(self, expected: Optional[str] = None) -> Token:
        token = self.peek()
        if token is None:
            raise QuerySyntaxError(f"意外的结尾，期望 {expected or '记号'}", self.end_offset)
        if expected is not None and token.kind != expected:
            raise QuerySyntaxError(f"期望 {expected!r}，实际为 {token.text!r}", token.offset)
        self.index += 1
        return token

    def keyword(self, *allowed: str) -> Token:
        token = self.next()
        if token.kind != "atom" or token.text not in allowed:
            raise QuerySyntaxError(f"期望关键字 {'/'.join(allowed)}，实际为 {token.text!r}", token.offset)
        return token

    def label(self, token: Token) -> str:
        if token.kind == "string":
            return json.loads(token.text)
        if token.kind == "atom":
            return token.text
        raise QuerySyntaxError(f"期望标签，实际为 {token.text!r}", token.offset)

    def entity(self, token: Token) -> int:
        name = self.label(token)
        if self.graph is None:
            return _numeric(name, token)
        return self.graph.resolve_entity(name)

    def relation(self, token: Token) -> int:
        name = self.label(token)
        if self.graph is None:
            return _numeric(name, token)
        return self.graph.resolve_relation(name)

    def parse_query(self):
        node = self.parse_expr()
        trailing = self.peek()
        if trailing is not None:
            raise QuerySyntaxError(f"表达式之后多余的记号 {trailing.text!r}", trailing.offset)
        return node

    def parse_expr(self):
        self.next("(")
        head = self.keyword("P", "and", "or", "not")
        if head.text == "P":
            return self.parse_projection()
        if head.text == "not":
            child = self.parse_expr()
            self.next(")")
            return Not(child=child)
        children = [self.parse_expr(), self.parse_expr()]
        while self.peek() is not None and self.peek().kind == "(":
            children.append(self.parse_expr())
        self.next(")")
        node_type = And if head.text == "and" else Or
        return node_type(children=tuple(children))

    def parse_projection(self) -> Projection:
        number = self.next("atom")
        if not number.text.isdigit():
            raise QuerySyntaxError(f"P 之后须为整数位置，实际为 {number.text!r}", number.offset)
        declared = int(number.text)
        self.next("(")
        self.keyword("f")
        entities = [self.parse_slot()]
        relations = []
        while self.peek() is not None and self.peek().kind != ")":
            relations.append(self.relation(self.next()))
            entities.append(self.parse_slot())
        self.next(")")
        self.next(")")

        targets = [i for i, slot in enumerate(entities, start=1) if isinstance(slot, Target)]
        if len(targets) != 1:
            raise MultipleTargetsError(f"投影必须恰有一个 '?'，实际为 {len(targets)} 个")
        position = targets[0]
        # 位置可写作实体位置（1起始），也可写作 (s, r, o, a1, v1, ...) 序列中的0起始下标
        if declared not in (position, 2 * (position - 1)):
            raise QuerySyntaxError(
                f"声明的位置 {declared} 与 '?' 所在实体位置 {position}（序列下标 {2 * (position - 1)}）不符",
                number.offset,
            )
        if len(entities) < 2:
            raise QuerySyntaxError("投影事实至少包含两个实体", number.offset)
        return Projection(relations=tuple(relations), entities=tuple(entities), target_position=position)

    def parse_slot(self):
        token = self.next()
        if token.kind == "(":
            self.keyword("var")
            child = self.parse_expr()
            self.next(")")
            return Var(child=child)
        if token.kind == "atom" and token.text == "?":
            return Target()
        return Anchor(entity=self.entity(token))


def _numeric(name: str, token: Token) -> int:
    if not name.isdigit():
        raise QuerySyntaxError(f"未提供图时标签必须为整数id: {name!r}", token.offset)
    return int(name)


def parse(text: str, graph: Optional[HyperGraph] = None):
    """解析查询文本为AST；提供图时按符号表解析标签，否则标签须为整数id"""
    node = _Parser(text, graph).parse_query()
    validate_ast(node)
    return node
