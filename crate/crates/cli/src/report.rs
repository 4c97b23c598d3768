//! Text forms of a [`ValidationReport`].
//!
//! The machine-readable form is one `key=value` pair per line, always in
//! this order:
//!
//! ```text
//! valid=true|false
//! capacity=<bits extracted>
//! signature_bits=<S>
//! padding_bits=<capacity - S, or 0>
//! padding_ok=true|false
//! failure_reason=none|capacity_too_small|signature_mismatch|padding_nonzero|parse_error
//! ```

use csvsig_core::ValidationReport;

pub fn render(report: &ValidationReport) -> String {
    let reason = report.failure_reason.map_or("none", |r| r.as_str());
    format!(
        "valid={}\ncapacity={}\nsignature_bits={}\npadding_bits={}\npadding_ok={}\nfailure_reason={}\n",
        report.valid,
        report.capacity,
        report.signature_bits,
        report.padding_bits(),
        report.padding_ok,
        reason,
    )
}

pub fn summary(report: &ValidationReport) -> String {
    let verdict = match report.failure_reason {
        None => "VALID".to_owned(),
        Some(reason) => format!("INVALID ({reason})"),
    };
    format!(
        "{verdict}\ncapacity: {} bits\nsignature bits: {}\npadding bits: {} ({})\n",
        report.capacity,
        report.signature_bits,
        report.padding_bits(),
        if report.padding_ok { "all zero" } else { "nonzero" },
    )
}
