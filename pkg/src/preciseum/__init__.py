"""Floating-point arithmetic that tracks how many mantissa bits to trust.

Every scalar and array element carries a count of exact leading mantissa
bits alongside its value.  Arithmetic, elementary functions, reductions
and matrix products propagate the count, and the formatters replace
digits the count cannot support with '?'.
"""

from . import autodiff, oracle
from .array import (
    XArray,
    chained_sum_reduce,
    dot,
    get_num_threads,
    load,
    map_binary,
    map_unary,
    max_reduce,
    mean,
    min_reduce,
    prod_reduce,
    round_array,
    save,
    set_num_threads,
    sum_reduce,
)
from .errors import (
    AxisError,
    BitsRangeError,
    CapabilityError,
    PreciseumError,
    SerializationError,
    ShapeError,
)
from .formats import BFLOAT16, BINARY16, BINARY32, BINARY64, FORMATS, FloatFormat
from .formatting import Fixed, Scientific, exact_decimal_digits, format_scalar
from .matmul import (
    InaccuracyExponentMatrix,
    estimate_holder,
    estimate_v1,
    estimate_v2,
    matmul,
    mixed_tropical,
    select_holder_p,
    tropical_matmul,
)
from .scalar import (
    Comparison,
    XScalar,
    add,
    approx_eq,
    apply_unary,
    div,
    from_decimal,
    from_exact,
    max_op,
    min_op,
    mul,
    neg,
    round_op,
    sub,
    with_bits,
)
from .unary import (
    ACOS,
    ASIN,
    ATAN,
    COS,
    EXP,
    LN,
    RECIP,
    SIGMOID,
    SIN,
    SQRT,
    TAN,
    TANH,
    UnaryFnDescriptor,
    add_const,
    by_name,
    pow_int,
    scale,
)

__version__ = "1.0.0"

__all__ = [
    "XScalar",
    "XArray",
    "Comparison",
    "FloatFormat",
    "BINARY64",
    "BINARY32",
    "BINARY16",
    "BFLOAT16",
    "FORMATS",
    "from_exact",
    "with_bits",
    "from_decimal",
    "add",
    "sub",
    "mul",
    "div",
    "min_op",
    "max_op",
    "neg",
    "apply_unary",
    "round_op",
    "approx_eq",
    "Fixed",
    "Scientific",
    "format_scalar",
    "exact_decimal_digits",
    "UnaryFnDescriptor",
    "by_name",
    "SIN",
    "COS",
    "TAN",
    "ASIN",
    "ACOS",
    "ATAN",
    "LN",
    "EXP",
    "SQRT",
    "RECIP",
    "TANH",
    "SIGMOID",
    "pow_int",
    "scale",
    "add_const",
    "map_binary",
    "map_unary",
    "round_array",
    "sum_reduce",
    "chained_sum_reduce",
    "prod_reduce",
    "min_reduce",
    "max_reduce",
    "mean",
    "dot",
    "save",
    "load",
    "set_num_threads",
    "get_num_threads",
    "matmul",
    "tropical_matmul",
    "mixed_tropical",
    "estimate_v1",
    "estimate_v2",
    "estimate_holder",
    "select_holder_p",
    "InaccuracyExponentMatrix",
    "autodiff",
    "oracle",
    "PreciseumError",
    "BitsRangeError",
    "ShapeError",
    "AxisError",
    "SerializationError",
    "CapabilityError",
]
