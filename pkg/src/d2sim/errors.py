"""Protocol error hierarchy with stable wire codes.

Every error a node can return over the wire carries a ``code`` that round-trips
through transports: a handler converts the exception to ``{"error": {"code",
"message"}}`` and the calling side re-raises the matching class.
"""

from __future__ import annotations


class D2Error(Exception):
    """Base class for protocol-level failures."""

    code = "d2_error"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_wire(self) -> dict:
        return {"code": self.code, "message": self.message}


class MalformedD2Id(D2Error):
    code = "malformed_d2id"


class MalformedMessage(D2Error):
    code = "malformed_message"


class MalformedPredicate(D2Error):
    code = "malformed_predicate"


class BadSignature(D2Error):
    code = "bad_signature"
    http_status = 403


class KeyMaterialError(D2Error):
    # the wire protocol's key-material failure; named to dodge builtins.KeyError
    code = "key_error"


class DecryptError(D2Error):
    code = "decrypt_error"


class UnknownTemp(D2Error):
    code = "unknown_temp"
    http_status = 404


class TempCollision(D2Error):
    code = "temp_collision"
    http_status = 409


class DuplicateD2Id(D2Error):
    code = "duplicate_d2id"
    http_status = 409


class UnknownD2Id(D2Error):
    code = "unknown_d2id"
    http_status = 404


class UnknownAccount(D2Error):
    code = "unknown_account"
    http_status = 404


class UnknownRequest(D2Error):
    code = "unknown_request"
    http_status = 404


class SelectionOutsideCandidates(D2Error):
    code = "selection_outside_candidates"


class NoCandidates(D2Error):
    code = "no_candidates"


class StaleAlert(D2Error):
    code = "stale_alert"
    http_status = 410


class AuthFailed(D2Error):
    code = "auth_failed"
    http_status = 403


class UnknownUser(D2Error):
    code = "unknown_user"
    http_status = 404


class UnknownIdentifier(D2Error):
    code = "unknown_identifier"
    http_status = 404


class NotRegistered(D2Error):
    code = "not_registered"
    http_status = 404


class TemporarilyUnavailable(D2Error):
    # retryable: a row whose temp went stale while its hub was unreachable
    code = "temporarily_unavailable"
    http_status = 503


class MismatchedDid(D2Error):
    code = "mismatched_did"


class HubRejected(D2Error):
    code = "hub_rejected"
    http_status = 502


class ProviderRejected(D2Error):
    code = "provider_rejected"
    http_status = 502


class CapabilityNotSupported(D2Error):
    code = "capability_not_supported"


class UntrustedIssuer(D2Error):
    code = "untrusted_issuer"


class RateLimited(D2Error):
    code = "rate_limited"
    http_status = 429


class HubUnreachable(D2Error):
    code = "hub_unreachable"
    http_status = 502


class IssuerUnreachable(D2Error):
    code = "issuer_unreachable"
    http_status = 502


class TargetUnreachable(D2Error):
    code = "target_unreachable"
    http_status = 502


class Unreachable(D2Error):
    # transport-level failure: connection refused, dropped by fault injection
    code = "unreachable"
    http_status = 503


class DeniedError(D2Error):
    code = "denied"
    http_status = 403


class TimeoutError_(D2Error):
    code = "timeout"
    http_status = 504


class BadPin(D2Error):
    code = "bad_pin"
    http_status = 403


class VaultLocked(D2Error):
    code = "vault_locked"
    http_status = 403


class DecisionTimeout(D2Error):
    code = "decision_timeout"
    http_status = 504


class ScenarioParseError(D2Error):
    code = "scenario_parse_error"


class NotFound(D2Error):
    code = "not_found"
    http_status = 404


_REGISTRY = {}


def _register(cls) -> None:
    _REGISTRY[cls.code] = cls


for _cls in list(globals().values()):
    if isinstance(_cls, type) and issubclass(_cls, D2Error):
        _register(_cls)


def error_for_code(code: str, message: str = "") -> D2Error:
    """Rebuild the exception a remote node serialized, defaulting to D2Error."""
    cls = _REGISTRY.get(code, D2Error)
    err = cls(message)
    if cls is D2Error:
        err.code = code or D2Error.code
    return err
