"""Signal-class surface language: parsing, annotation inference, lowering."""
from .lower import (AnnotatedClass, LoweredProgram, class_wiring, infer_and_check_annotations,
                    lower)
from .parser import Program, SignalClassDecl, parse_expr, parse_program, unparse_program
from .timing import ANYTIME, Anytime, Every, parse_timing, timing_to_ticks

__all__ = [
    "ANYTIME", "AnnotatedClass", "Anytime", "Every", "LoweredProgram", "Program",
    "SignalClassDecl", "class_wiring", "infer_and_check_annotations", "lower", "parse_expr",
    "parse_program", "parse_timing", "timing_to_ticks", "unparse_program",
]
