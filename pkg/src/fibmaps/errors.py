"""Exception hierarchy.

Everything the CLI reports with exit status 1 derives from ``DynamicsError``.
"""


class DynamicsError(RuntimeError):
    pass


class OrbitEscaped(DynamicsError):
    def __init__(self, time: int, value=None):
        self.time = time
        self.value = value
        super().__init__(f"orbit escaped at time {time}")


class InsufficientPrecision(DynamicsError):
    def __init__(self, detail: str = "", level: int | None = None):
        self.level = level
        msg = "insufficient precision"
        if level is not None:
            msg += f" at level {level}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CombinatoricsUnreachable(DynamicsError):
    def __init__(self, detail: str = ""):
        super().__init__("combinatorics unreachable" + (f": {detail}" if detail else ""))


class CombinatoricsBroken(DynamicsError):
    def __init__(self, level: int, detail: str = ""):
        self.level = level
        super().__init__(f"combinatorics broken at level {level}" + (f": {detail}" if detail else ""))


class MultiplierNotFound(DynamicsError):
    def __init__(self, detail: str = ""):
        super().__init__("multiplier not found" + (f": {detail}" if detail else ""))


class Divergence(DynamicsError):
    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"divergence after {steps} steps")


class CriticalCollision(DynamicsError):
    def __init__(self, detail: str = ""):
        super().__init__("critical collision" + (f": {detail}" if detail else ""))


class DisjointnessViolated(DynamicsError):
    def __init__(self, i: int, j: int):
        super().__init__(f"disjointness violated between return domains {i} and {j}")


class CodeMismatch(DynamicsError):
    def __init__(self, level: int, detail: str = ""):
        self.level = level
        super().__init__(f"code mismatch at level {level}" + (f": {detail}" if detail else ""))


class QuadratureError(DynamicsError):
    def __init__(self, achieved: float, requested: float):
        self.achieved = achieved
        super().__init__(f"quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")


class DegenerateTriple(ValueError):
    def __init__(self, gamma):
        super().__init__(f"triple degenerate: gamma = {gamma} must be negative")


class NotFibonacciRegime(DynamicsError):
    def __init__(self, detail: str = ""):
        super().__init__("not in Fibonacci regime" + (f": {detail}" if detail else ""))
