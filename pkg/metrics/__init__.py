from .metrics import MatrixEvaluator

__all__ = ["MatrixEvaluator"]
