import collections
import configparser
import dataclasses
import logging
import os
import typing

logger = logging.getLogger(__name__)

# Tolerances shared by every module
EPS_DET = 1e-12
EPS_MIN = 1e-9
EPS_DIV = 1e-9
EPS_ORTH = 1e-9
EPS_RANK = 1e-9

MAX_ENUMERATION_DIM = 12
MAX_HADAMARD_ORDER = 4096
MAX_CONSTELLATION_POINTS = 2 ** 20

# A registry is used to auto-register the lattice audits.
lattice_audit_registry = {}


def register_lattice_audit(readable_name, description):
    def inner_decorator(f):
        if readable_name in lattice_audit_registry:
            raise KeyError(f"Name '{readable_name}' already in use!")
        lattice_audit_registry[readable_name] = (readable_name, description, f)
        return f

    return inner_decorator


def get_lattice_audits():
    return lattice_audit_registry


###############################################################################
# Errors
###############################################################################
class WorkbenchError(Exception):
    """Base class for every error raised by the workbench"""


class UsageError(WorkbenchError, ValueError):
    """Invalid input; the command line maps these to exit code 2"""


class DimensionTooLarge(UsageError):
    pass


class NonInvertibleGenerator(UsageError):
    pass


class OrderTooLarge(UsageError):
    pass


class NotOrthogonal(UsageError):
    def __init__(self, deviation):
        super().__init__(f"Matrix is not orthogonal: max|R^T R - I| = {deviation:.3e}")
        self.deviation = deviation


class ParseError(UsageError):
    pass


class UnknownName(UsageError):
    pass


class UnsupportedDimension(UsageError):
    pass


class NegativeK(UsageError):
    pass


class NegativeInput(UsageError):
    pass


class NonpositiveVariance(UsageError):
    pass


class NonpositiveVolume(UsageError):
    pass


class LengthMismatch(UsageError):
    pass


class TooManyPoints(UsageError):
    pass


class InvalidQ(UsageError):
    pass


class ZeroVector(UsageError):
    pass


class UnsupportedOrder(UsageError):
    pass


class InvalidBound(UsageError):
    pass


class EmptyTruncation(UsageError):
    pass


class ViolationFound(WorkbenchError):
    def __init__(self, witness, product, threshold):
        super().__init__(f"Local diversity violated by {list(witness)}: k*|t|^2 = {product:.6g} < {threshold}")
        self.witness = witness
        self.product = product
        self.threshold = threshold


class NumericalFailure(WorkbenchError):
    """A numerical routine failed to converge; the command line maps these to exit code 3"""


###############################################################################
# Configuration
###############################################################################
class ConfigurationSettings:
    """
    Represents a local configuration file
    with default settings for the experiment
    commands. Command line flags always win.
    """

    SECTION = 'Workbench'
    MANDATORY_FIELDS = ('trials', 'seed')

    def __init__(self, configfile=None):
        """Load data from a file, otherwise create
        a config object with default settings"""

        if configfile:
            logger.debug(f"Loading config file from {configfile}")
            if not os.path.isfile(configfile):
                raise UsageError(f"Config file '{configfile}' does not exist! Exiting")
            self.local_config = configparser.ConfigParser()
            self.local_config.read(configfile)
            self.validate_mandatory_fields()
        else:
            self.local_config = configparser.ConfigParser(allow_no_value=True)
            self.local_config.add_section(self.SECTION)
            self.local_config.set(self.SECTION, '# Monte Carlo trials per grid point')
            self.local_config.set(self.SECTION, 'trials', '100000')
            self.local_config.set(self.SECTION, '# 64-bit master seed; substreams are derived from it')
            self.local_config.set(self.SECTION, 'seed', '20161')
            self.local_config.set(self.SECTION, '# Worker threads. Results do not depend on this value')
            self.local_config.set(self.SECTION, 'threads', '1')
            self.local_config.set(self.SECTION, '# Trials per work item of the analysis estimators')
            self.local_config.set(self.SECTION, 'block size', '4096')

            self.local_config.set(self.SECTION, '# PEP series truncation: bound = factor * minimal squared norm')
            self.local_config.set(self.SECTION, 'pep truncation factor', '4')

            self.local_config.set(self.SECTION, '# FadeVariance audit: Rician factor used for Var(h^2)')
            self.local_config.set(self.SECTION, 'audit K', '20')
            self.local_config.set(self.SECTION, '# LocalDiversity audit: squared-norm radius')
            self.local_config.set(self.SECTION, 'audit radius', '4')

    def validate_mandatory_fields(self):
        if not self.local_config.has_section(self.SECTION):
            raise UsageError(f"Config file needs a [{self.SECTION}] section!")
        for field in self.MANDATORY_FIELDS:
            if not self.local_config[self.SECTION].get(field):
                raise UsageError(f"'{field}' needs to be specified!")

    def write_config(self, config_path):
        config_dir = os.path.dirname(config_path)
        if config_dir:
            os.makedirs(config_dir, exist_ok=True)
        with open(config_path, 'w') as config_fh:
            self.local_config.write(config_fh)

    def get_config(self):
        return self.local_config[self.SECTION]


@dataclasses.dataclass
class AuditPackage:
    """Class for storing the values the audits run against"""
    name: str
    lattice: typing.Any
    settings: typing.Any
    hadamard: typing.Optional[typing.Any] = None
    radius: float = 4.0


Finding = collections.namedtuple('Finding', ['data', 'text', 'lattice_name', 'metric', 'value'])
