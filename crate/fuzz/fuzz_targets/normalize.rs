#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::Normalizer;

fuzz_target!(|data: &[u8]| {
    let n = Normalizer::english();
    if let Ok(t) = n.normalize_bytes(data) {
        for tok in &t.tokens {
            assert!(!tok.is_empty());
            assert!(!n.stopwords().contains(tok));
            assert!(!tok.chars().any(char::is_whitespace));
        }
        // normalization is idempotent on its own output
        assert_eq!(n.normalize(&t.joined()).tokens, t.tokens);
    }
});
