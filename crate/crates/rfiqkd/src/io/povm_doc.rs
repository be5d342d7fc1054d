use std::path::Path;

use nalgebra::DMatrix;

use crate::quantum::{HermitianOperator, Povm, C64, CHANNELS};

use super::IoError;

/// Completeness tolerance applied when ingesting a POVM document. Printed
/// element sets from real characterizations do not close exactly (their
/// residual is what `validate_povm` reports), so reading is lenient; the
/// writer still emits whatever set it is given verbatim.
pub const POVM_READ_TOLERANCE: f64 = 0.05;

/// Serialize a POVM as four labeled 2x2 complex matrices, row-major,
/// "re im" pairs with 6 decimals.
pub fn povm_to_document(povm: &Povm) -> String {
    let mut out = String::new();
    out.push_str("# Receiver POVM: four labeled 2x2 complex effects.\n");
    out.push_str("# Each matrix row lists its entries as \"re im\" pairs, 6 decimals.\n");
    for (ch, effect) in CHANNELS.iter().zip(povm.elements()) {
        out.push_str(&format!("[Pi_{}]\n", ch.label()));
        let m = effect.matrix();
        for r in 0..2 {
            let mut row = String::new();
            for col in 0..2 {
                if col > 0 {
                    row.push_str("  ");
                }
                let z = m[(r, col)];
                row.push_str(&format!("{:.6} {:.6}", z.re, z.im));
            }
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

/// Parse a POVM document; element order in the file must be D, A, L, R.
/// Validation is lenient in completeness (see [`POVM_READ_TOLERANCE`]) but
/// strict in positivity.
pub fn povm_from_document(text: &str) -> Result<Povm, String> {
    let mut matrices: Vec<DMatrix<C64>> = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    let flush = |rows: &mut Vec<Vec<C64>>, matrices: &mut Vec<DMatrix<C64>>| -> Result<(), String> {
        if rows.is_empty() {
            return Ok(());
        }
        if rows.len() != 2 {
            return Err(format!("matrix has {} rows, expected 2", rows.len()));
        }
        let flat: Vec<C64> = rows.concat();
        matrices.push(DMatrix::from_row_slice(2, 2, &flat));
        rows.clear();
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            flush(&mut rows, &mut matrices).map_err(|e| format!("line {}: {e}", idx + 1))?;
            let label = line.trim_matches(['[', ']']).to_string();
            labels.push(label);
            continue;
        }
        let numbers: Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let numbers = numbers.map_err(|_| format!("line {}: cannot parse {line:?}", idx + 1))?;
        if numbers.len() != 4 {
            return Err(format!(
                "line {}: expected 4 numbers (two re/im pairs), got {}",
                idx + 1,
                numbers.len()
            ));
        }
        rows.push(vec![C64::new(numbers[0], numbers[1]), C64::new(numbers[2], numbers[3])]);
    }
    flush(&mut rows, &mut matrices)?;

    if matrices.len() != 4 {
        return Err(format!("document has {} matrices, expected 4", matrices.len()));
    }
    let expected = ["Pi_D", "Pi_A", "Pi_L", "Pi_R"];
    for (got, want) in labels.iter().zip(expected) {
        if got != want {
            return Err(format!("matrix label {got:?} where {want:?} expected (order D, A, L, R)"));
        }
    }
    let mut elements = Vec::with_capacity(4);
    for m in matrices {
        let op = HermitianOperator::new(m).map_err(|e| format!("not a valid effect: {e}"))?;
        // The 6-decimal quantization can push a boundary-rank effect a hair
        // below zero; clip tiny negative eigenvalues, refuse real ones.
        let floor = op.min_eigenvalue();
        if floor < -1e-4 {
            return Err(format!("effect has negative eigenvalue {floor:.3e}"));
        }
        elements.push(if floor < 0.0 { clip_negative(&op) } else { op });
    }
    Povm::with_tolerance(elements, POVM_READ_TOLERANCE).map_err(|e| format!("not a POVM: {e}"))
}

fn clip_negative(op: &HermitianOperator) -> HermitianOperator {
    let (vals, vecs) = op.eigh();
    let mut m = DMatrix::<C64>::zeros(op.dim(), op.dim());
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            m += (&col * col.adjoint()) * C64::new(v, 0.0);
        }
    }
    HermitianOperator::new(m).expect("hermitian by construction")
}

pub fn write_povm_document(path: &Path, povm: &Povm) -> Result<(), IoError> {
    super::write_string(path, &povm_to_document(povm))
}

pub fn read_povm_document(path: &Path) -> Result<Povm, IoError> {
    povm_from_document(&super::read_to_string(path)?).map_err(|m| IoError::data(path, m))
}
