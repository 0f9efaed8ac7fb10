//! Fuzzes the Pauli-string decoder. The first input byte selects the
//! coefficient (including the non-finite ones the guard must reject); the
//! rest is the letter string. Accepted terms must round-trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use trotterlab::hamiltonian::PauliTerm;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(letters) = std::str::from_utf8(rest) else { return };
    let coefficient = match selector % 4 {
        0 => f64::NAN,
        1 => f64::NEG_INFINITY,
        2 => 0.0,
        _ => f64::from(selector) - 128.0,
    };
    if let Ok(term) = PauliTerm::parse(coefficient, letters) {
        assert!(term.coefficient().is_finite());
        assert_eq!(term.n_sites(), letters.chars().count());
        // The decoder is case-sensitive, so accepted inputs round-trip
        // verbatim.
        let round_trip: String = term.letters().iter().map(|p| p.to_char()).collect();
        assert_eq!(round_trip, letters);
    }
});
