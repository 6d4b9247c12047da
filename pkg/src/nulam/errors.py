"""Exception hierarchy shared by the whole engine."""


class NulamError(Exception):
    """Base class for all errors raised by this package."""


class TypeError_(NulamError):
    """Base class for object-language typing errors."""


class UnboundVariable(TypeError_):
    def __init__(self, idx, path=()):
        super().__init__(f"unbound variable {idx} at path {list(path)}")
        self.idx = idx
        self.path = tuple(path)


class BadBaseIndex(TypeError_):
    def __init__(self, idx, n_base, path=()):
        super().__init__(f"base type '{idx} out of range (engine has {n_base} base types)")
        self.idx = idx
        self.n_base = n_base
        self.path = tuple(path)


class TypeMismatch(TypeError_):
    def __init__(self, expected, got, path=()):
        super().__init__(f"expected {expected}, got {got} at path {list(path)}")
        self.expected = expected
        self.got = got
        self.path = tuple(path)


class IllTyped(TypeError_):
    """A term handed to an operation that requires well-typed input failed to infer."""


class TypeMismatchBetweenSides(TypeError_):
    """The two sides of an equality query infer to different types."""

    def __init__(self, left, right):
        super().__init__(f"left side has type {left}, right side has type {right}")
        self.left = left
        self.right = right


class ShapeViolation(NulamError):
    """An evaluator met a value of the wrong shape.  Signals an internal bug,
    not a user error: shapes are guaranteed by typing."""


class FuelExhausted(NulamError):
    """The staged normalizer ran out of its re-entry budget."""


class UnknownName(NulamError):
    def __init__(self, name):
        super().__init__(f"unknown name {name!r}")
        self.name = name


class ParseError(NulamError):
    def __init__(self, line, col, message):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message
