//! Luhn checksum over decimal digit strings. Gates the credit-card
//! recognizer so long numeric IDs don't false-positive.

/// True when `digits` (ASCII decimal, no separators) passes the Luhn check.
/// Empty or non-digit input is invalid.
pub fn luhn_valid(digits: &str) -> bool {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    let mut sum = 0u32;
    for (i, b) in digits.bytes().rev().enumerate() {
        let mut d = u32::from(b - b'0');
        if i % 2 == 1 {
            d *= 2;
            if d > 9 {
                d -= 9;
            }
        }
        sum += d;
    }
    sum.is_multiple_of(10)
}

#[cfg(test)]
mod tests {
    use super::luhn_valid;

    // Reference implementation with a different shape: doubles via lookup
    // table walking left-to-right on an even/odd-length split.
    fn luhn_reference(digits: &str) -> bool {
        const DOUBLED: [u32; 10] = [0, 2, 4, 6, 8, 1, 3, 5, 7, 9];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return false;
        }
        let parity = digits.len() % 2;
        let mut sum = 0u32;
        for (i, b) in digits.bytes().enumerate() {
            let d = u32::from(b - b'0');
            sum += if i % 2 == parity { DOUBLED[d as usize] } else { d };
        }
        sum.is_multiple_of(10)
    }

    #[test]
    fn known_valid_numbers() {
        for n in [
            "4111111111111111",
            "4012888888881881",
            "5555555555554444",
            "378282246310005",
            "6011111111111117",
            "30569309025904",
            "4222222222222",
        ] {
            assert!(luhn_valid(n), "{n}");
        }
    }

    #[test]
    fn single_digit_change_detected() {
        assert!(!luhn_valid("4111111111111112"));
        assert!(!luhn_valid("4111111111111121"));
    }

    #[test]
    fn rejects_non_digits_and_empty() {
        assert!(!luhn_valid(""));
        assert!(!luhn_valid("4111-1111"));
        assert!(!luhn_valid("abc"));
    }

    #[test]
    fn agrees_with_reference_on_random_strings() {
        // Deterministic pseudo-random digit strings via a simple LCG.
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let len = 1 + (state >> 33) as usize % 24;
            let mut s = String::new();
            let mut x = state;
            for _ in 0..len {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                s.push(char::from(b'0' + (x >> 60) as u8 % 10));
            }
            assert_eq!(luhn_valid(&s), luhn_reference(&s), "{s}");
        }
    }
}
