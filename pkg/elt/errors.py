"""
Exceptions raised by the elt package.

Errors come in two families. :class:`InputError` covers bad files and bad
usage; :class:`DomainError` covers inputs that are well formed but break a
rule of the formalism (axioms, thresholds). The command line maps them to
exit codes 2 and 1.
"""


class ELTError(Exception):
    """Base class for all elt errors"""


class InputError(ELTError):
    """Malformed input or usage"""


class DomainError(ELTError):
    """Well formed input that violates a rule"""


# ingestion
class MissingColumn(InputError):

    def __init__(self, column):
        self.column = column
        super().__init__('column {!r} not found'.format(column))


class NonNumericCell(InputError):

    def __init__(self, row, col):
        self.row = row
        self.col = col
        super().__init__('non-numeric cell at row {} column {!r}'.format(row, col))


class TooShort(InputError):

    def __init__(self, n):
        self.n = n
        super().__init__('series has {} rows, at least 2 are required'.format(n))


# schema
class SchemaSyntaxError(InputError):

    def __init__(self, line, col, expected, found=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = 'line {} col {}: expected {}'.format(line, col, expected)
        if found is not None:
            msg += ', found {!r}'.format(found)
        super().__init__(msg)


class UnknownPredicate(InputError):

    def __init__(self, name):
        self.name = name
        super().__init__('unknown predicate {!r}'.format(name))


class UnknownOperator(InputError):

    def __init__(self, name):
        self.name = name
        super().__init__('unknown operator {!r}'.format(name))


class DuplicateEventType(InputError):

    def __init__(self, name):
        self.name = name
        super().__init__('event type {!r} declared twice'.format(name))


class BadParameter(InputError):

    def __init__(self, name, reason=''):
        self.name = name
        msg = 'bad parameter {!r}'.format(name)
        if reason:
            msg += ': {}'.format(reason)
        super().__init__(msg)


class AxiomViolation(DomainError):

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__('; '.join(str(v) for v in self.violations))


# features and search
class OutOfBounds(InputError):
    pass


class UnknownChannel(InputError):

    def __init__(self, channel):
        self.channel = channel
        super().__init__('unknown channel {!r}'.format(channel))


class SegmentTooShort(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class BudgetExceeded(InputError):

    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__('{} assignments exceed the exhaustive budget of {}'.format(
            count, budget))


class EmptyCandidates(InputError):

    def __init__(self, path):
        self.path = path
        super().__init__('no candidates for primitive at {}'.format(path))


# detection and evaluation
class EmptyCatalog(InputError):
    pass


class ChannelMismatch(InputError):

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__('frame is missing schema channels {}'.format(self.missing))


class BadThreshold(DomainError):

    def __init__(self, value):
        self.value = value
        super().__init__('IoU threshold must be in (0, 1], got {}'.format(value))


class FormatVersionError(InputError):

    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__('expected format {!r}, found {!r}'.format(expected, found))


class ConfigError(InputError):
    pass
