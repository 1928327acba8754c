"""Core exceptions raised by vsa capacity"""


class VSAError(Exception):
    pass


class InvalidDimensionError(VSAError):
    pass


class InvalidParameterError(VSAError):
    pass


class InvalidConfigError(VSAError):
    pass


class InvalidLookbackError(VSAError):
    pass


class UnretrievableLookbackError(VSAError):
    pass


class UndefinedSNRError(VSAError):
    pass


class ConfigError(VSAError):
    pass


class DataError(VSAError):
    pass


class ParsingError(VSAError):
    pass
