"""Lexing, parsing, type checking and printing of the accepted C subset."""
from .parser import parse_source, parse_statements
from .printer import ast_to_c, function_to_c
from .sema import ProgramEnv, check, check_function

__all__ = ["parse_source", "parse_statements", "ast_to_c", "function_to_c", "ProgramEnv",
           "check", "check_function"]
