use num_complex::Complex64;

/// `1/√10`, giving unit average symbol energy.
pub const QAM16_NORM: f64 = 0.316_227_766_016_837_94;

/// Per-axis level for each 2-bit Gray label: `00 → −3, 01 → −1, 11 → +1, 10 → +3`.
pub const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

/// Maps the low 4 bits `b3 b2 b1 b0` to a symbol; `b3 b2` picks I, `b1 b0` picks Q.
pub fn qam16_map(bits: u8) -> Complex64 {
    let i = QAM16_LEVELS[((bits >> 2) & 0b11) as usize];
    let q = QAM16_LEVELS[(bits & 0b11) as usize];
    Complex64::new(i * QAM16_NORM, q * QAM16_NORM)
}

/// Minimum-distance slicing back to the 4-bit label.
pub fn qam16_demap(y: Complex64) -> u8 {
    (slice_axis(y.re / QAM16_NORM) << 2) | slice_axis(y.im / QAM16_NORM)
}

fn slice_axis(x: f64) -> u8 {
    if x < -2.0 {
        0b00
    } else if x < 0.0 {
        0b01
    } else if x < 2.0 {
        0b11
    } else {
        0b10
    }
}
