"""Exception types raised across the package.

Everything derives from SpikePlastError so callers (and the CLI) can catch
one base class and report the failing stage.
"""


class SpikePlastError(Exception):
    """Base class for all package errors."""


# --- encoding ---

class EmptyChannelError(SpikePlastError):
    """A channel has fewer than two timepoints, so no temporal difference exists."""


class NonFiniteInputError(SpikePlastError):
    """Analog input contains NaN or infinity."""


# --- simulation ---

class NonFiniteCurrentError(SpikePlastError):
    """Input current to a neuron is NaN or infinite."""


class ShapeMismatchError(SpikePlastError):
    """Array dimensions disagree with the layer or synapse geometry."""


class InactiveNeuronError(SpikePlastError):
    """A deactivated neuron was stepped or updated; callers must skip them."""


# --- statistics and tuning ---

class ZeroStepsError(SpikePlastError):
    """Firing statistics requested over an empty observation window."""


class EmptyGridError(SpikePlastError):
    """A tuning grid has no candidate values."""


# --- pruning ---

class NotTrainedError(SpikePlastError):
    """Operation requires a network that has completed a training pass."""


class AllNeuronsPrunedError(SpikePlastError):
    """A pruning threshold would deactivate every hidden neuron."""


# --- classification ---

class EmptyGalleryError(SpikePlastError):
    """Classification requested against an empty set of output neurons."""


class DimensionMismatchError(SpikePlastError):
    """Weight vectors being compared have different lengths."""


# --- datasets ---

class DatasetParseError(SpikePlastError):
    """A dataset file or manifest could not be parsed; message names the location."""


class MissingLabelError(SpikePlastError):
    """A manifest entry lacks a label or uses one outside the class table."""


class MixedChannelCountsError(SpikePlastError):
    """Samples in one dataset disagree on channel count."""


class InvalidSpecError(SpikePlastError):
    """Synthetic data specification is out of range or inconsistent."""


# --- evaluation ---

class DegenerateSplitError(SpikePlastError):
    """A requested split or fold count cannot be satisfied by the dataset."""


class InsufficientDataError(SpikePlastError):
    """A statistical routine needs more observations than were given."""


# --- configuration and snapshots ---

class InvalidConfigError(SpikePlastError):
    """Experiment configuration failed validation; message names the key path."""


class SnapshotFormatError(SpikePlastError):
    """A model snapshot has an unknown version or is structurally invalid."""
