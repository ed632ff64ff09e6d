"""MiniPy: tokenizer, parser, renderer and reference interpreter."""

from mixcode.lang.interp import (
    DEFAULT_STEP_LIMIT, ExecResult, MiniPyRuntimeError, StepLimitExceeded, interpret,
)
from mixcode.lang.lexer import LexError, Token, tokenize
from mixcode.lang.parser import ParseError, parse, parse_source
from mixcode.lang.render import lexemes, render

__all__ = [
    "DEFAULT_STEP_LIMIT", "ExecResult", "LexError", "MiniPyRuntimeError",
    "ParseError", "StepLimitExceeded", "Token", "interpret", "lexemes",
    "parse", "parse_source", "render", "tokenize",
]
