def _format_details(msg, detail_dict):
    if not detail_dict:
        return msg
    return '{}. {}'.format(
        msg, ', '.join('{}="{}"'.format(k, v) for k, v in sorted(detail_dict.items()))
    )


class LipanError(Exception):
    def __init__(self, msg, **detail_dict):
        super(LipanError, self).__init__(_format_details(msg, detail_dict))
        self.detail_dict = detail_dict


class DomainError(LipanError):
    """Domain parameters outside the accepted ranges."""

    pass


class ConfigError(LipanError):
    """Run configuration is missing a field, has a value out of range, or names an
    unknown builtin.
    """

    pass


class CapacityError(LipanError):
    def __init__(self, msg, requested, cap, **detail_dict):
        super(CapacityError, self).__init__(
            msg, requested=requested, cap=cap, **detail_dict
        )
        self.requested = requested
        self.cap = cap


class SeparationError(LipanError):
    """The sampled infimum of q on the unit sphere is not positive."""

    pass


class GaugeError(LipanError):
    pass


class GaugeOverflowError(GaugeError):
    pass


class BracketError(GaugeError):
    """The root bracket of the gauge equation is invalid. Always a bug."""

    pass


class GateError(LipanError):
    pass


class GateUnsatisfiableError(GateError):
    pass


class GateCertificationError(GateError):
    def __init__(self, msg, gate_name, constraint, location, margin):
        super(GateCertificationError, self).__init__(
            msg,
            gate=gate_name,
            constraint=constraint,
            location=location,
            margin=margin,
        )
        self.gate_name = gate_name
        self.constraint = constraint
        self.location = location
        self.margin = margin


class DegreeBudgetError(GateError):
    pass


class GateDomainError(GateError):
    pass


class ModulusError(LipanError):
    """Modulus of continuity data is missing, too coarse for the requested epsilon, or
    inconsistent with sampled values of the target.
    """

    pass


class InvariantViolation(LipanError):
    pass


class BackendDisagreement(InvariantViolation):
    pass
