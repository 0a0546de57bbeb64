"""Shared data model for the D2 protocol: identity pointers, pseudonyms,
capability documents, and the canonical text encodings every role agrees on.

Protocol-versioned constants live here: the D2Id delimiter (``|``), the DID
token grammar (``did:d2:`` + 22 base58 chars), and the 128-bit token sizes.
"""

from __future__ import annotations

import base64
import json
import re
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional
from urllib.parse import urlparse

from .errors import MalformedD2Id, MalformedMessage

D2ID_SEPARATOR = "|"
DID_PREFIX = "did:d2:"
TOKEN_BITS = 128

_BASE58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_DID_RE = re.compile(r"^did:d2:[1-9A-HJ-NP-Za-km-z]{22}$")
_TEMP_RE = re.compile(r"^[A-Za-z0-9_-]{22}$")
_TOKEN_RE = _TEMP_RE  # account ids, request ids, nonces share the temp grammar


# ---------------------------------------------------------------------------
# Canonical JSON + base64url helpers
# ---------------------------------------------------------------------------

def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no insignificant whitespace, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")


def b64u_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def b64u_decode(token: str) -> bytes:
    pad = "=" * (-len(token) % 4)
    try:
        return base64.urlsafe_b64decode(token + pad)
    except Exception as exc:
        raise MalformedMessage(f"bad base64url token: {exc}") from exc


# ---------------------------------------------------------------------------
# Entropy and clock injection points
# ---------------------------------------------------------------------------

class Entropy:
    """Source of random bytes. Nodes never touch os.urandom directly so a
    harness can substitute a seeded stream and replay runs byte-for-byte."""

    def token(self, nbytes: int) -> bytes:
        raise NotImplementedError


class SystemEntropy(Entropy):
    def token(self, nbytes: int) -> bytes:
        return secrets.token_bytes(nbytes)


class SeededEntropy(Entropy):
    def __init__(self, seed: int):
        import random

        self._rng = random.Random(seed)

    def token(self, nbytes: int) -> bytes:
        return self._rng.randbytes(nbytes)


class Clock:
    def now(self) -> datetime:
        raise NotImplementedError

    def today(self):
        return self.now().date()


class SystemClock(Clock):
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class LogicalClock(Clock):
    """Fixed virtual time, advanced only by explicit scenario steps."""

    def __init__(self, start: Optional[datetime] = None):
        self._now = start or datetime(2026, 1, 1, tzinfo=timezone.utc)

    def now(self) -> datetime:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now = self._now + timedelta(seconds=seconds)


def iso_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_utc(s: str) -> datetime:
    return datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


# ---------------------------------------------------------------------------
# Identity pointer types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HubAddress:
    """Absolute base URL of a hub, with no trailing separator."""

    url: str

    def __post_init__(self):
        if not self.url:
            raise MalformedD2Id("hub address is empty")
        if D2ID_SEPARATOR in self.url:
            raise MalformedD2Id("hub address contains the D2Id separator")
        if self.url.endswith("/"):
            raise MalformedD2Id("hub address has a trailing separator")
        parsed = urlparse(self.url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise MalformedD2Id(f"hub address is not an absolute URL: {self.url!r}")


@dataclass(frozen=True)
class DidToken:
    """Opaque issuer-minted token, fixed grammar, 128 bits of entropy."""

    value: str

    def __post_init__(self):
        if not _DID_RE.match(self.value):
            raise MalformedD2Id(f"bad DID token grammar: {self.value!r}")


@dataclass(frozen=True)
class D2Id:
    """Globally resolvable identity pointer: hub address + DID token."""

    hub: HubAddress
    did: DidToken

    def encode(self) -> str:
        return f"{self.hub.url}{D2ID_SEPARATOR}{self.did.value}"


def encode_d2id(d2id: D2Id) -> str:
    return d2id.encode()


def decode_d2id(s: str) -> D2Id:
    """Total over arbitrary strings: anything but one separator and two valid
    halves raises MalformedD2Id."""
    if not isinstance(s, str):
        raise MalformedD2Id("d2id must be a string")
    parts = s.split(D2ID_SEPARATOR)
    if len(parts) != 2:
        raise MalformedD2Id(f"expected exactly one {D2ID_SEPARATOR!r} separator")
    return D2Id(hub=HubAddress(parts[0]), did=DidToken(parts[1]))


def _base58_encode(data: bytes) -> str:
    num = int.from_bytes(data, "big")
    out = []
    while num:
        num, rem = divmod(num, 58)
        out.append(_BASE58_ALPHABET[rem])
    return "".join(reversed(out)) or _BASE58_ALPHABET[0]


def mint_did_token(entropy: Entropy) -> DidToken:
    raw = entropy.token(TOKEN_BITS // 8)
    # left-pad with the zero digit so the grammar is fixed-width
    return DidToken(DID_PREFIX + _base58_encode(raw).rjust(22, _BASE58_ALPHABET[0]))


def mint_temp_d2id(entropy: Entropy) -> str:
    """128 random bits, base64url without padding (22 chars). Hub-level
    uniqueness is the inserting store's job."""
    return b64u_encode(entropy.token(TOKEN_BITS // 8))


def mint_token(entropy: Entropy) -> str:
    """Generic 128-bit token: account ids, request ids, nonces."""
    return b64u_encode(entropy.token(TOKEN_BITS // 8))


def is_valid_temp(value: str) -> bool:
    return isinstance(value, str) and bool(_TEMP_RE.match(value))


def is_valid_token(value: str) -> bool:
    return isinstance(value, str) and bool(_TOKEN_RE.match(value))


# ---------------------------------------------------------------------------
# Capabilities and the claim-free capability document
# ---------------------------------------------------------------------------

AUTHENTICATION = "Authentication"
AGE_VALIDATION = "AgeValidation"
ADDRESS_VALIDATION = "AddressValidation"
PROOF_OF_NATIONALITY = "ProofOfNationality"

KNOWN_CAPABILITIES = frozenset(
    {AUTHENTICATION, AGE_VALIDATION, ADDRESS_VALIDATION, PROOF_OF_NATIONALITY}
)

_CAPABILITY_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")


def validate_capability(name: str) -> str:
    """Known names are canonical; unknown tags are accepted and round-trip."""
    if not isinstance(name, str) or not _CAPABILITY_RE.match(name):
        raise MalformedMessage(f"bad capability tag: {name!r}")
    return name


@dataclass(frozen=True)
class D2Vc:
    """Claim-free capability document: issuer URL plus capability tags.

    There is no claim/value field by construction; the serialized form has
    exactly the two keys ``issuer`` and ``types``.
    """

    issuer: str
    types: frozenset

    def __post_init__(self):
        parsed = urlparse(self.issuer)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise MalformedMessage(f"issuer is not an absolute URL: {self.issuer!r}")
        if not self.types:
            raise MalformedMessage("capability set is empty")
        for t in self.types:
            validate_capability(t)

    def to_dict(self) -> dict:
        return {"issuer": self.issuer, "types": sorted(self.types)}

    @classmethod
    def from_dict(cls, d: dict) -> "D2Vc":
        if set(d.keys()) != {"issuer", "types"}:
            raise MalformedMessage(f"d2vc must have exactly issuer+types, got {sorted(d)}")
        return cls(issuer=d["issuer"], types=frozenset(d["types"]))


# ---------------------------------------------------------------------------
# Store rows (one per role)
# ---------------------------------------------------------------------------

@dataclass
class HubRow:
    """What a hub holds per identity: pseudonym (absent between consumption
    and rotation), pointer, capability document. Never a username."""

    d2id: D2Id
    d2vc: D2Vc
    temp: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "temp": self.temp,
            "d2id": self.d2id.encode(),
            "d2vc": self.d2vc.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HubRow":
        return cls(
            d2id=decode_d2id(d["d2id"]),
            d2vc=D2Vc.from_dict(d["d2vc"]),
            temp=d.get("temp"),
        )


@dataclass
class ProviderRow:
    identifier: str
    temp: str
    d2id: D2Id
    d2vc: D2Vc
    agent_pubkey: str

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "temp": self.temp,
            "d2id": self.d2id.encode(),
            "d2vc": self.d2vc.to_dict(),
            "agent_pubkey": self.agent_pubkey,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderRow":
        return cls(
            identifier=d["identifier"],
            temp=d["temp"],
            d2id=decode_d2id(d["d2id"]),
            d2vc=D2Vc.from_dict(d["d2vc"]),
            agent_pubkey=d["agent_pubkey"],
        )


@dataclass
class AgentRow:
    identifier: str
    provider_url: str
    d2id: D2Id
    d2vc: D2Vc

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "provider_url": self.provider_url,
            "d2id": self.d2id.encode(),
            "d2vc": self.d2vc.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentRow":
        return cls(
            identifier=d["identifier"],
            provider_url=d["provider_url"],
            d2id=decode_d2id(d["d2id"]),
            d2vc=D2Vc.from_dict(d["d2vc"]),
        )


def normalize_address(address: str) -> str:
    """Normalization both sides apply before the confirm/deny address match."""
    cleaned = re.sub(r"[.,;]", " ", address.casefold())
    return re.sub(r"\s+", " ", cleaned).strip()
