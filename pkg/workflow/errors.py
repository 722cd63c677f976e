#!/usr/bin/env python3
"""Exception hierarchy shared by every stage.

Each error carries a short ``category`` that the command line prints as the
machine-parsable part of its single-line failure message.
"""


class GaitLabError(Exception):
    """Base class for all errors raised by the lab"""
    category = "error"


class ConfigError(GaitLabError):
    category = "config"

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ParameterError(GaitLabError):
    category = "parameter"


class TopologyError(GaitLabError):
    category = "topology"


class ValidationError(GaitLabError):
    category = "validation"


class ContractError(GaitLabError):
    category = "contract"


class NumericalError(GaitLabError):
    category = "numerical"


class ProtocolError(GaitLabError):
    category = "protocol"


class MetricError(GaitLabError):
    category = "metric"


class ResultsParseError(GaitLabError):
    category = "parse"

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ManifestError(GaitLabError):
    category = "manifest"


def error_category(exc: BaseException) -> str:
    """Category printed by the CLI for any exception"""
    if isinstance(exc, GaitLabError):
        return exc.category
    if isinstance(exc, OSError):
        return "io"
    return "internal"
