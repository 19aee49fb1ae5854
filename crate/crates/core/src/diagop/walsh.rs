use crate::scalar::Scalar;

/// In-place unnormalized Walsh-Hadamard transform.
///
/// Afterwards `data[k] = sum_b data_before[b] * (-1)^popcount(b & k)`.
/// The transform is its own inverse up to a factor `data.len()`.
pub fn fwht<S: Scalar>(data: &mut [S]) {
    let len = data.len();
    assert!(len.is_power_of_two(), "transform length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                let a = data[i].clone();
                let b = data[i + half].clone();
                data[i] = a.clone() + b.clone();
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}
