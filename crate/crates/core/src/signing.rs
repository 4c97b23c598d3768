//! Signatures carried in the quoting pattern of a CSV table.
//!
//! Signing hashes the canonical bytes of the table, then writes the
//! signature bits (zero-padded to the table's payload) into the optional
//! quotes of a stripped copy. Verification recomputes the canonical bytes
//! from the received table, which are unaffected by the embedded quotes,
//! and checks them against the extracted bits.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::csv_model::{canonical_bytes, strip, Field, Table};
use crate::hiding::{embed, extract, payload, BitString};
use crate::keys::{KeyError, RawSigner, RawVerifier};

/// The table has fewer carrier fields than the signature has bits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("payload of {payload} bits cannot hold a {signature_bits}-bit signature")]
pub struct CapacityError {
    pub payload: usize,
    pub signature_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignError {
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Key(#[from] KeyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    CapacityTooSmall,
    SignatureMismatch,
    PaddingNonzero,
    ParseError,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::CapacityTooSmall => "capacity_too_small",
            FailureReason::SignatureMismatch => "signature_mismatch",
            FailureReason::PaddingNonzero => "padding_nonzero",
            FailureReason::ParseError => "parse_error",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of checking a table against a public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    /// Bits extracted from the table.
    pub capacity: usize,
    pub signature_bits: usize,
    /// Every extracted bit after the signature is zero.
    pub padding_ok: bool,
    pub failure_reason: Option<FailureReason>,
}

impl ValidationReport {
    /// A report for a file that could not be checked at all.
    pub fn failed(reason: FailureReason, capacity: usize, signature_bits: usize) -> Self {
        ValidationReport {
            valid: false,
            capacity,
            signature_bits,
            padding_ok: false,
            failure_reason: Some(reason),
        }
    }

    pub fn padding_bits(&self) -> usize {
        self.capacity.saturating_sub(self.signature_bits)
    }
}

/// Signs `table` and returns a copy whose quoting carries the signature.
///
/// The result is `embed(strip(table), signature ∘ 0…0)`: contents are
/// untouched and every carrier past the signature is left bare.
pub fn sign_table<S: RawSigner + ?Sized>(table: &Table, signer: &S) -> Result<Table, SignError> {
    let stripped = strip(table);
    let capacity = payload(&stripped);
    let signature_bits = signer.signature_bits();
    if capacity < signature_bits {
        return Err(CapacityError {
            payload: capacity,
            signature_bits,
        }
        .into());
    }

    let signature = signer.sign_raw(&canonical_bytes(&stripped));
    if signature.len() * 8 != signature_bits {
        return Err(KeyError::SignatureLength {
            scheme: signer.scheme_name().to_owned(),
            expected: signature_bits,
            actual: signature.len() * 8,
        }
        .into());
    }

    let mut bits = BitString::from_bytes(&signature);
    bits.extend_from(&BitString::zeros(capacity - signature_bits));
    Ok(embed(&stripped, &bits).expect("message sized to payload"))
}

/// Checks the signature embedded in `table`.
///
/// Fails with [`CapacityError`] only when the table has too few carriers
/// to hold a signature; every other problem is reported as `valid = false`.
pub fn verify_table<V: RawVerifier + ?Sized>(table: &Table, verifier: &V) -> Result<ValidationReport, CapacityError> {
    let extracted = extract(table);
    let signature_bits = verifier.signature_bits();
    let capacity = extracted.bits.len();
    if capacity < signature_bits {
        return Err(CapacityError {
            payload: capacity,
            signature_bits,
        });
    }

    let (signature, padding) = extracted.bits.split_at(signature_bits);
    let padding_ok = padding.count_ones() == 0;
    let signature_ok = signature
        .to_bytes()
        .is_some_and(|sig| verifier.verify_raw(&canonical_bytes(table), &sig));

    let failure_reason = if !signature_ok {
        Some(FailureReason::SignatureMismatch)
    } else if !padding_ok {
        Some(FailureReason::PaddingNonzero)
    } else {
        None
    };
    Ok(ValidationReport {
        valid: failure_reason.is_none(),
        capacity,
        signature_bits,
        padding_ok,
        failure_reason,
    })
}

/// How a re-saving tool rewrites quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequoteMode {
    /// Quote only where required, like most spreadsheet exporters.
    StripAll,
    /// Quote every field.
    QuoteAll,
}

impl RequoteMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RequoteMode::StripAll => "strip_all",
            RequoteMode::QuoteAll => "quote_all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown requote mode {0:?} (expected strip_all or quote_all)")]
pub struct UnknownRequoteMode(pub String);

impl FromStr for RequoteMode {
    type Err = UnknownRequoteMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strip_all" => Ok(RequoteMode::StripAll),
            "quote_all" => Ok(RequoteMode::QuoteAll),
            other => Err(UnknownRequoteMode(other.to_owned())),
        }
    }
}

/// Rewrites quoting the way a load-and-save through another tool would.
pub fn simulate_requote(table: &Table, mode: RequoteMode) -> Table {
    match mode {
        RequoteMode::StripAll => strip(table),
        RequoteMode::QuoteAll => table.map_fields(|f| Field::new(f.content.clone(), true)),
    }
}
