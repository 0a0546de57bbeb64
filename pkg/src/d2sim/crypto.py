"""Cryptographic primitives shared by all roles.

Algorithm suite (versioned in the envelope header): Ed25519 signatures,
X25519 ephemeral-static key agreement, HKDF-SHA256, AES-256-GCM. Vault files
use an Argon2id PIN-derived key. Keys travel as unpadded base64url of the raw
32-byte form.
"""

from __future__ import annotations

from typing import Optional

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.argon2 import Argon2id
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import BadPin, BadSignature, DecryptError, KeyMaterialError
from .model import Entropy, b64u_decode, b64u_encode, canonical_bytes

ENVELOPE_HEADER = {"v": 1, "sig": "ed25519", "kx": "x25519", "aead": "aes256gcm"}

_GCM_NONCE_BYTES = 12
_KEY_BYTES = 32


# ---------------------------------------------------------------------------
# Signing (Ed25519)
# ---------------------------------------------------------------------------

def generate_signing_key(entropy: Entropy) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(entropy.token(_KEY_BYTES))


def signing_key_to_b64(key: Ed25519PrivateKey) -> str:
    from cryptography.hazmat.primitives.serialization import (
        Encoding,
        NoEncryption,
        PrivateFormat,
    )

    return b64u_encode(key.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption()))


def signing_key_from_b64(b64: str) -> Ed25519PrivateKey:
    try:
        return Ed25519PrivateKey.from_private_bytes(b64u_decode(b64))
    except Exception as exc:
        raise KeyMaterialError(f"bad signing key: {exc}") from exc


def verify_key_b64(key: Ed25519PrivateKey) -> str:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    return b64u_encode(key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw))


def _load_verify_key(pub_b64: str) -> Ed25519PublicKey:
    try:
        raw = b64u_decode(pub_b64)
        return Ed25519PublicKey.from_public_bytes(raw)
    except Exception as exc:
        raise KeyMaterialError(f"bad verification key: {exc}") from exc


def sign_payload(key: Ed25519PrivateKey, context: str, payload: dict) -> str:
    """Sign the canonical bytes of a context-tagged payload.

    The context string domain-separates every signature use in the protocol
    so a signature minted for one purpose never verifies for another.
    """
    message = canonical_bytes({"ctx": context, "payload": payload})
    return b64u_encode(key.sign(message))


def verify_payload(pub_b64: str, context: str, payload: dict, signature_b64: str) -> None:
    """Raises BadSignature unless the signature verifies."""
    pub = _load_verify_key(pub_b64)
    message = canonical_bytes({"ctx": context, "payload": payload})
    try:
        sig = b64u_decode(signature_b64)
    except Exception as exc:
        raise BadSignature(f"undecodable signature for ctx={context}") from exc
    try:
        pub.verify(sig, message)
    except InvalidSignature as exc:
        raise BadSignature(f"signature check failed for ctx={context}") from exc


# ---------------------------------------------------------------------------
# Key agreement + authenticated encryption (X25519 / AES-256-GCM)
# ---------------------------------------------------------------------------

def generate_kx_key(entropy: Entropy) -> X25519PrivateKey:
    return X25519PrivateKey.from_private_bytes(entropy.token(_KEY_BYTES))


def kx_key_to_b64(key: X25519PrivateKey) -> str:
    from cryptography.hazmat.primitives.serialization import (
        Encoding,
        NoEncryption,
        PrivateFormat,
    )

    return b64u_encode(key.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption()))


def kx_key_from_b64(b64: str) -> X25519PrivateKey:
    try:
        return X25519PrivateKey.from_private_bytes(b64u_decode(b64))
    except Exception as exc:
        raise KeyMaterialError(f"bad key-agreement key: {exc}") from exc


def kx_pub_b64(key: X25519PrivateKey) -> str:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    return b64u_encode(key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw))


def _derive_seal_key(shared: bytes) -> bytes:
    hkdf = HKDF(
        algorithm=hashes.SHA256(),
        length=_KEY_BYTES,
        salt=None,
        info=canonical_bytes(ENVELOPE_HEADER),
    )
    return hkdf.derive(shared)


def seal(plaintext: bytes, recipient_pub_b64: str, entropy: Entropy) -> dict:
    """Encrypt to the recipient's X25519 public key (ephemeral-static)."""
    try:
        recipient = X25519PublicKey.from_public_bytes(b64u_decode(recipient_pub_b64))
    except Exception as exc:
        raise KeyMaterialError(f"bad recipient public key: {exc}") from exc
    eph = generate_kx_key(entropy)
    key = _derive_seal_key(eph.exchange(recipient))
    nonce = entropy.token(_GCM_NONCE_BYTES)
    ct = AESGCM(key).encrypt(nonce, plaintext, canonical_bytes(ENVELOPE_HEADER))
    return {
        "header": dict(ENVELOPE_HEADER),
        "sender_eph_pubkey": kx_pub_b64(eph),
        "nonce": b64u_encode(nonce),
        "ciphertext": b64u_encode(ct),
    }


def unseal(sealed: dict, recipient_priv: X25519PrivateKey) -> bytes:
    """Authenticated decryption; any tampering or wrong key raises DecryptError."""
    try:
        header = sealed["header"]
        eph_pub = X25519PublicKey.from_public_bytes(b64u_decode(sealed["sender_eph_pubkey"]))
        nonce = b64u_decode(sealed["nonce"])
        ct = b64u_decode(sealed["ciphertext"])
    except DecryptError:
        raise
    except Exception as exc:
        raise DecryptError(f"malformed sealed blob: {exc}") from exc
    if header != ENVELOPE_HEADER:
        raise DecryptError(f"unsupported envelope header: {header!r}")
    key = _derive_seal_key(recipient_priv.exchange(eph_pub))
    try:
        return AESGCM(key).decrypt(nonce, ct, canonical_bytes(ENVELOPE_HEADER))
    except InvalidTag as exc:
        raise DecryptError("authenticated decryption failed") from exc


# ---------------------------------------------------------------------------
# PIN-derived vault keys (Argon2id)
# ---------------------------------------------------------------------------

DEFAULT_KDF_PARAMS = {"memory_kib": 65536, "iterations": 2, "lanes": 2}


def derive_vault_key(pin: str, salt: bytes, params: Optional[dict] = None) -> bytes:
    p = params or DEFAULT_KDF_PARAMS
    kdf = Argon2id(
        salt=salt,
        length=_KEY_BYTES,
        iterations=int(p["iterations"]),
        lanes=int(p["lanes"]),
        memory_cost=int(p["memory_kib"]),
    )
    return kdf.derive(pin.encode("utf-8"))


def encrypt_vault(plaintext: bytes, pin: str, entropy: Entropy,
                  params: Optional[dict] = None) -> dict:
    p = dict(params or DEFAULT_KDF_PARAMS)
    salt = entropy.token(16)
    key = derive_vault_key(pin, salt, p)
    nonce = entropy.token(_GCM_NONCE_BYTES)
    ct = AESGCM(key).encrypt(nonce, plaintext, b"d2vault:v1")
    return {
        "v": 1,
        "kdf": "argon2id",
        "kdf_params": p,
        "salt": b64u_encode(salt),
        "nonce": b64u_encode(nonce),
        "ciphertext": b64u_encode(ct),
    }


def decrypt_vault(blob: dict, pin: str) -> bytes:
    """Wrong PIN yields an authentication failure, never garbage plaintext."""
    try:
        salt = b64u_decode(blob["salt"])
        nonce = b64u_decode(blob["nonce"])
        ct = b64u_decode(blob["ciphertext"])
        params = blob["kdf_params"]
    except Exception as exc:
        raise BadPin(f"malformed vault blob: {exc}") from exc
    key = derive_vault_key(pin, salt, params)
    try:
        return AESGCM(key).decrypt(nonce, ct, b"d2vault:v1")
    except InvalidTag as exc:
        raise BadPin("vault authentication failed") from exc
