"""Every message exchanged between roles, plus the mediated-mode envelope.

All wire types serialize to canonical JSON with lowercase snake_case keys and
round-trip exactly. Signatures are always computed over
``model.canonical_bytes`` of the signed fields, never over a transport frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey

from . import crypto
from .errors import MalformedMessage, MalformedPredicate
from .model import (
    ADDRESS_VALIDATION,
    AGE_VALIDATION,
    AUTHENTICATION,
    PROOF_OF_NATIONALITY,
    D2Id,
    Entropy,
    canonical_bytes as _canonical_bytes,
    decode_d2id,
    is_valid_temp,
    is_valid_token,
    validate_capability,
)

MODE_DIRECT = "direct"
MODE_MEDIATED = "mediated"

OUTCOME_GRANTED = "granted"
OUTCOME_DENIED = "denied"
OUTCOME_MEDIATED = "mediated_result"

DENIAL_REASON_DENIED = "denied"
DENIAL_REASON_TIMEOUT = "timeout"


def canonical_bytes(message) -> bytes:
    """Canonical byte serialization of a wire message (or a plain dict)."""
    if hasattr(message, "to_dict"):
        return _canonical_bytes(message.to_dict())
    return _canonical_bytes(message)


# ---------------------------------------------------------------------------
# Predicates (versioned, pluggable grammar)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgeOver:
    years: int

    def to_dict(self) -> dict:
        return {"kind": "age_over", "years": self.years}


@dataclass(frozen=True)
class AddressMatches:
    address: str

    def to_dict(self) -> dict:
        return {"kind": "address_matches", "address": self.address}


@dataclass(frozen=True)
class NationalityEquals:
    code: str

    def to_dict(self) -> dict:
        return {"kind": "nationality_equals", "code": self.code}


@dataclass(frozen=True)
class AuthChallenge:
    nonce: str

    def to_dict(self) -> dict:
        return {"kind": "auth_challenge", "nonce": self.nonce}


PREDICATE_CAPABILITY = {
    "age_over": AGE_VALIDATION,
    "address_matches": ADDRESS_VALIDATION,
    "nationality_equals": PROOF_OF_NATIONALITY,
    "auth_challenge": AUTHENTICATION,
}


def predicate_from_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise MalformedPredicate(f"predicate must be an object with a kind: {d!r}")
    kind = d["kind"]
    try:
        if kind == "age_over":
            years = d["years"]
            if not isinstance(years, int) or isinstance(years, bool) or years < 0:
                raise MalformedPredicate(f"age_over.years must be a non-negative int: {years!r}")
            return AgeOver(years=years)
        if kind == "address_matches":
            if not isinstance(d["address"], str) or not d["address"].strip():
                raise MalformedPredicate("address_matches.address must be a non-empty string")
            return AddressMatches(address=d["address"])
        if kind == "nationality_equals":
            code = d["code"]
            if not isinstance(code, str) or not (2 <= len(code) <= 3) or not code.isalpha():
                raise MalformedPredicate(f"nationality_equals.code must be an ISO-3166 code: {code!r}")
            return NationalityEquals(code=code)
        if kind == "auth_challenge":
            if not isinstance(d["nonce"], str) or not d["nonce"]:
                raise MalformedPredicate("auth_challenge.nonce must be a non-empty string")
            return AuthChallenge(nonce=d["nonce"])
    except KeyError as exc:
        raise MalformedPredicate(f"predicate {kind!r} missing field {exc}") from exc
    raise MalformedPredicate(f"unknown predicate kind: {kind!r}")


def capability_for_predicate(predicate) -> str:
    return PREDICATE_CAPABILITY[predicate.to_dict()["kind"]]


# ---------------------------------------------------------------------------
# Discovery handshake messages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LookupRequest:
    identifier: str
    requester: str

    def to_dict(self) -> dict:
        return {"identifier": self.identifier, "requester": self.requester}

    @classmethod
    def from_dict(cls, d: dict) -> "LookupRequest":
        return cls(identifier=d["identifier"], requester=d["requester"])


@dataclass(frozen=True)
class LookupResponse:
    """Never contains the identifier or any D2Id."""

    hub: str
    temp: str

    def to_dict(self) -> dict:
        return {"hub": self.hub, "temp": self.temp}

    @classmethod
    def from_dict(cls, d: dict) -> "LookupResponse":
        return cls(hub=d["hub"], temp=d["temp"])


@dataclass(frozen=True)
class PredicateSpec:
    """What a mediated requester wants asked, plus its replay nonce."""

    predicate: object
    nonce: str

    def to_dict(self) -> dict:
        return {"predicate": self.predicate.to_dict(), "nonce": self.nonce}

    @classmethod
    def from_dict(cls, d: dict) -> "PredicateSpec":
        return cls(predicate=predicate_from_dict(d["predicate"]), nonce=d["nonce"])


@dataclass(frozen=True)
class DiscoveryRequest:
    temp: str
    requester: str
    wanted: Tuple[str, ...]
    mode: str
    request_id: str
    requester_pubkey: Optional[str] = None
    predicates: Optional[Dict[str, PredicateSpec]] = None

    def __post_init__(self):
        if not self.wanted:
            raise MalformedMessage("wanted capabilities must be non-empty")
        for c in self.wanted:
            validate_capability(c)
        if self.mode not in (MODE_DIRECT, MODE_MEDIATED):
            raise MalformedMessage(f"bad mode: {self.mode!r}")
        if not is_valid_temp(self.temp):
            raise MalformedMessage("bad temp token")
        if not is_valid_token(self.request_id):
            raise MalformedMessage("bad request_id token")
        if self.mode == MODE_MEDIATED:
            if not self.requester_pubkey:
                raise MalformedMessage("mediated mode requires requester_pubkey")
            if not self.predicates or set(self.predicates) != set(self.wanted):
                raise MalformedMessage("mediated mode requires one predicate per wanted capability")
            for cap, spec in self.predicates.items():
                if capability_for_predicate(spec.predicate) != cap:
                    raise MalformedMessage(
                        f"predicate kind does not match capability {cap!r}")

    def to_dict(self) -> dict:
        d = {
            "temp": self.temp,
            "requester": self.requester,
            "wanted": list(self.wanted),
            "mode": self.mode,
            "request_id": self.request_id,
        }
        if self.requester_pubkey is not None:
            d["requester_pubkey"] = self.requester_pubkey
        if self.predicates is not None:
            d["predicates"] = {c: s.to_dict() for c, s in sorted(self.predicates.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DiscoveryRequest":
        predicates = None
        if d.get("predicates") is not None:
            predicates = {c: PredicateSpec.from_dict(s) for c, s in d["predicates"].items()}
        return cls(
            temp=d["temp"],
            requester=d["requester"],
            wanted=tuple(d["wanted"]),
            mode=d["mode"],
            request_id=d["request_id"],
            requester_pubkey=d.get("requester_pubkey"),
            predicates=predicates,
        )


@dataclass(frozen=True)
class UserAlert:
    request_id: str
    requester: str
    wanted: Tuple[str, ...]
    candidates: Dict[str, Tuple[str, ...]]
    mode: str
    deadline: str

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "requester": self.requester,
            "wanted": list(self.wanted),
            "candidates": {c: list(v) for c, v in sorted(self.candidates.items())},
            "mode": self.mode,
            "deadline": self.deadline,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UserAlert":
        return cls(
            request_id=d["request_id"],
            requester=d["requester"],
            wanted=tuple(d["wanted"]),
            candidates={c: tuple(v) for c, v in d["candidates"].items()},
            mode=d["mode"],
            deadline=d["deadline"],
        )


VERDICT_APPROVE = "approve"
VERDICT_REJECT = "reject"


@dataclass(frozen=True)
class UserDecision:
    request_id: str
    verdict: str
    selection: Optional[Dict[str, str]] = None

    def __post_init__(self):
        if self.verdict not in (VERDICT_APPROVE, VERDICT_REJECT):
            raise MalformedMessage(f"bad verdict: {self.verdict!r}")
        if self.verdict == VERDICT_APPROVE and not self.selection:
            raise MalformedMessage("approval requires a selection")
        if self.verdict == VERDICT_REJECT and self.selection:
            raise MalformedMessage("rejection carries no selection")

    def to_dict(self) -> dict:
        d = {"request_id": self.request_id, "verdict": self.verdict}
        if self.selection is not None:
            d["selection"] = {c: u for c, u in sorted(self.selection.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "UserDecision":
        return cls(
            request_id=d["request_id"],
            verdict=d["verdict"],
            selection=dict(d["selection"]) if d.get("selection") is not None else None,
        )


@dataclass(frozen=True)
class Grant:
    issuer: str
    temp: str

    def to_dict(self) -> dict:
        return {"issuer": self.issuer, "temp": self.temp}

    @classmethod
    def from_dict(cls, d: dict) -> "Grant":
        return cls(issuer=d["issuer"], temp=d["temp"])


@dataclass(frozen=True)
class DiscoveryResponse:
    request_id: str
    outcome: str
    grants: Optional[Dict[str, Grant]] = None
    sealed: Optional[Dict[str, "SignedEncryptedAttestation"]] = None
    reason: Optional[str] = None

    def __post_init__(self):
        if self.outcome not in (OUTCOME_GRANTED, OUTCOME_DENIED, OUTCOME_MEDIATED):
            raise MalformedMessage(f"bad outcome: {self.outcome!r}")
        if self.outcome == OUTCOME_DENIED and (self.grants or self.sealed):
            raise MalformedMessage("denial carries no issuer information")

    def to_dict(self) -> dict:
        d = {"request_id": self.request_id, "outcome": self.outcome}
        if self.grants is not None:
            d["grants"] = {c: g.to_dict() for c, g in sorted(self.grants.items())}
        if self.sealed is not None:
            d["sealed"] = {c: s.to_dict() for c, s in sorted(self.sealed.items())}
        if self.reason is not None:
            d["reason"] = self.reason
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DiscoveryResponse":
        grants = None
        if d.get("grants") is not None:
            grants = {c: Grant.from_dict(g) for c, g in d["grants"].items()}
        sealed = None
        if d.get("sealed") is not None:
            sealed = {c: SignedEncryptedAttestation.from_dict(s) for c, s in d["sealed"].items()}
        return cls(
            request_id=d["request_id"],
            outcome=d["outcome"],
            grants=grants,
            sealed=sealed,
            reason=d.get("reason"),
        )


# ---------------------------------------------------------------------------
# Predicate queries and attestations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredicateQuery:
    temp: str
    predicate: object
    requester: str
    nonce: str

    def to_dict(self) -> dict:
        return {
            "temp": self.temp,
            "predicate": self.predicate.to_dict(),
            "requester": self.requester,
            "nonce": self.nonce,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PredicateQuery":
        return cls(
            temp=d["temp"],
            predicate=predicate_from_dict(d["predicate"]),
            requester=d["requester"],
            nonce=d["nonce"],
        )


ATTESTATION_SIGN_CTX = "d2:attestation"


@dataclass(frozen=True)
class Attestation:
    """Signed boolean answer to a predicate; never carries the attribute."""

    issuer: str
    predicate: object
    result: bool
    nonce: str
    issued_at: str
    signature: str = ""

    def signed_fields(self) -> dict:
        return {
            "issuer": self.issuer,
            "predicate": self.predicate.to_dict(),
            "result": self.result,
            "nonce": self.nonce,
            "issued_at": self.issued_at,
        }

    def to_dict(self) -> dict:
        d = self.signed_fields()
        d["signature"] = self.signature
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Attestation":
        return cls(
            issuer=d["issuer"],
            predicate=predicate_from_dict(d["predicate"]),
            result=bool(d["result"]),
            nonce=d["nonce"],
            issued_at=d["issued_at"],
            signature=d.get("signature", ""),
        )


def sign_attestation(att: Attestation, issuer_key: Ed25519PrivateKey) -> Attestation:
    sig = crypto.sign_payload(issuer_key, ATTESTATION_SIGN_CTX, att.signed_fields())
    return Attestation(
        issuer=att.issuer,
        predicate=att.predicate,
        result=att.result,
        nonce=att.nonce,
        issued_at=att.issued_at,
        signature=sig,
    )


def verify_attestation(att: Attestation, issuer_pub_b64: str) -> None:
    crypto.verify_payload(issuer_pub_b64, ATTESTATION_SIGN_CTX, att.signed_fields(), att.signature)


@dataclass(frozen=True)
class SignedEncryptedAttestation:
    """Sign-then-encrypt envelope: the issuer signature travels inside the
    ciphertext, so a relaying hub can neither read nor tamper."""

    header: dict
    sender_eph_pubkey: str
    nonce: str
    ciphertext: str

    def to_dict(self) -> dict:
        return {
            "header": dict(self.header),
            "sender_eph_pubkey": self.sender_eph_pubkey,
            "nonce": self.nonce,
            "ciphertext": self.ciphertext,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignedEncryptedAttestation":
        return cls(
            header=dict(d["header"]),
            sender_eph_pubkey=d["sender_eph_pubkey"],
            nonce=d["nonce"],
            ciphertext=d["ciphertext"],
        )


def seal_attestation(
    att: Attestation,
    requester_pubkey_b64: str,
    issuer_signing_key: Ed25519PrivateKey,
    entropy: Entropy,
) -> SignedEncryptedAttestation:
    """Sign first, then encrypt to the requester's key."""
    signed = sign_attestation(att, issuer_signing_key)
    sealed = crypto.seal(canonical_bytes(signed), requester_pubkey_b64, entropy)
    return SignedEncryptedAttestation.from_dict(sealed)


def open_attestation(
    sealed: SignedEncryptedAttestation,
    requester_privkey: X25519PrivateKey,
    issuer_pub_b64: str,
) -> Attestation:
    """Decrypt-then-verify; both must succeed for acceptance."""
    import json

    plaintext = crypto.unseal(sealed.to_dict(), requester_privkey)
    try:
        att = Attestation.from_dict(json.loads(plaintext.decode("utf-8")))
    except Exception as exc:
        raise MalformedMessage(f"sealed payload is not an attestation: {exc}") from exc
    verify_attestation(att, issuer_pub_b64)
    return att


# ---------------------------------------------------------------------------
# Rotation
# ---------------------------------------------------------------------------

ROTATION_SIGN_CTX = "d2:rotation"


@dataclass(frozen=True)
class RotationNotice:
    d2id: D2Id
    new_temp: str
    issuer_signature: str = ""

    def signed_fields(self) -> dict:
        return {"d2id": self.d2id.encode(), "new_temp": self.new_temp}

    def to_dict(self) -> dict:
        d = self.signed_fields()
        d["issuer_signature"] = self.issuer_signature
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RotationNotice":
        return cls(
            d2id=decode_d2id(d["d2id"]),
            new_temp=d["new_temp"],
            issuer_signature=d.get("issuer_signature", ""),
        )


def sign_rotation(d2id: D2Id, new_temp: str, issuer_key: Ed25519PrivateKey) -> RotationNotice:
    notice = RotationNotice(d2id=d2id, new_temp=new_temp)
    sig = crypto.sign_payload(issuer_key, ROTATION_SIGN_CTX, notice.signed_fields())
    return RotationNotice(d2id=d2id, new_temp=new_temp, issuer_signature=sig)


def verify_rotation(notice: RotationNotice, issuer_pub_b64: str) -> None:
    crypto.verify_payload(
        issuer_pub_b64, ROTATION_SIGN_CTX, notice.signed_fields(), notice.issuer_signature
    )


WIRE_TYPES = {
    "lookup_request": LookupRequest,
    "lookup_response": LookupResponse,
    "discovery_request": DiscoveryRequest,
    "user_alert": UserAlert,
    "user_decision": UserDecision,
    "discovery_response": DiscoveryResponse,
    "predicate_query": PredicateQuery,
    "attestation": Attestation,
    "signed_encrypted_attestation": SignedEncryptedAttestation,
    "rotation_notice": RotationNotice,
}
