"""
🔤 多项式 DSL 解析器 (pyparsing)
语法:
    expr   :: ['+'|'-'] term [ ('+'|'-') term ]*
    term   :: coeff [ '*' factor ]* | factor [ '*' factor ]*
    factor :: var [ '^' uint ]
    var    :: ('phi' | 'pi' | 'phidot') uint
    coeff  :: decimal literal
空白 (含换行) 忽略；规范序列化见 ClassicalPoly.to_text
"""

import pyparsing as pp

from config import config
from modules.errors import ExponentOverflowError, PolySyntaxError, UnknownVariableError
from modules.operator_algebra import VAR_PATTERN, ClassicalPoly
from utils.logger import logger


def _location(text: str, loc: int) -> tuple:
    return pp.lineno(loc, text), pp.col(loc, text)


def _make_factor(text, loc, toks):
    """变量名 + 可选指数 → ClassicalPoly 单项式"""
    name = toks[0]
    match = VAR_PATTERN.match(name)
    if not match:
        line, column = _location(text, loc)
        raise UnknownVariableError(f"unknown variable {name!r}", line, column)
    exponent = int(toks[1]) if len(toks) > 1 else 1
    if exponent > config.MAX_DEGREE:
        raise ExponentOverflowError(
            f"exponent {exponent} of {name} exceeds maximum degree {config.MAX_DEGREE}"
        )
    var = (match.group(1), int(match.group(2)))
    return ClassicalPoly({((var, exponent),): 1.0})


def _make_coefficient(toks):
    return ClassicalPoly.constant(float(toks[0]))


def _make_term(toks):
    result = toks[0]
    for factor in toks[1:]:
        result = result * factor
    return result


def _build_grammar() -> pp.ParserElement:
    number = pp.Regex(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").set_name("coefficient")
    ident = pp.Regex(r"[A-Za-z_][A-Za-z_0-9]*").set_name("variable")
    uint = pp.Word(pp.nums).set_name("exponent")
    sign = pp.one_of("+ -")

    factor = (ident + pp.Optional(pp.Suppress("^") + uint)).set_parse_action(_make_factor)
    coeff = number.copy().set_parse_action(_make_coefficient)
    term = ((coeff | factor) + pp.ZeroOrMore(pp.Suppress("*") + factor)).set_parse_action(_make_term)
    return pp.Optional(sign) + term + pp.ZeroOrMore(sign + term) + pp.StringEnd()


_GRAMMAR = _build_grammar()


def parse_poly(text: str, mode_count: int | None = None) -> ClassicalPoly:
    """
    解析 DSL 文本为 ClassicalPoly
    参数:
        text: UTF-8 多项式文本，例如 "0.5*pi1^2 + 0.5*phi1^2"
        mode_count: 声明的模式数 (默认取最大变量下标)
    返回:
        ClassicalPoly
    """
    try:
        tokens = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseException as exc:
        raise PolySyntaxError(f"cannot parse polynomial: {exc.msg}", exc.lineno, exc.col) from None

    result = ClassicalPoly()
    sign = 1.0
    for tok in tokens:
        if isinstance(tok, str):
            sign = -1.0 if tok == "-" else 1.0
        else:
            result = result + tok * sign
            sign = 1.0
    if mode_count is not None:
        result = ClassicalPoly(result.as_dict(), mode_count)
    logger.debug(f"🔤 解析多项式: {text!r} → {result.to_text()}")
    return result


def format_poly(f: ClassicalPoly) -> str:
    """规范序列化 (parse_poly 的逆)"""
    return f.to_text()
