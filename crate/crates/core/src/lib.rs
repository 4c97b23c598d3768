//! Digital signatures hidden in the optional quotes of CSV files.
//!
//! RFC 4180 lets a field without commas, quotes or line breaks be written
//! either bare or quoted. Each such field can therefore carry one bit
//! without changing the data. This crate uses that channel to embed a
//! signature over the file's canonical (minimally quoted) form, so a signed
//! file stays an ordinary CSV file with identical contents.
//!
//! ```
//! use csvsig_core::{parse, serialize, sign_table, verify_table, keygen};
//!
//! let rows: String = (0..60).map(|i| format!("{i},a{i},b{i},c{i},d{i},e{i},f{i},g{i},h{i},i{i}\n")).collect();
//! let table = parse(rows.as_bytes()).unwrap();
//! let keys = keygen("ed25519").unwrap();
//!
//! let signed = sign_table(&table, &keys).unwrap();
//! let bytes = serialize(&signed).unwrap();
//!
//! let report = verify_table(&parse(&bytes).unwrap(), &keys.public_key).unwrap();
//! assert!(report.valid);
//! ```

pub mod csv_model;
pub mod hiding;
pub mod keys;
pub mod signing;

pub use csv_model::{canonical_bytes, parse, serialize, strip, Field, InvariantViolation, ParseError, Table};
pub use hiding::{embed, extract, noesc, payload, BitString, ExtractionResult, LengthMismatch};
pub use keys::{
    keygen, keygen_with_rng, KeyError, KeyPair, PrivateKey, PublicKey, RawSigner, RawVerifier, Scheme, SignatureScheme,
};
pub use signing::{
    sign_table, simulate_requote, verify_table, CapacityError, FailureReason, RequoteMode, SignError, ValidationReport,
};
