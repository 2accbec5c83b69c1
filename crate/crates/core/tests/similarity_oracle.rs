mod support;

use ethoscan::similarity::{containment, tokenize, FingerprintSet, DEFAULT_K};
use rand::rngs::StdRng;
use rand::SeedableRng;

use support::kgram;
use support::planted::{planted_case, random_tokens};

fn fp(tokens: &[String]) -> FingerprintSet {
    FingerprintSet::from_tokens(tokens, DEFAULT_K)
}

#[test]
fn containment_matches_brute_force_on_planted_snippets() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    for case in 0..200 {
        let c = planted_case(&mut rng, DEFAULT_K);
        for (needle, hay) in [(&c.plant, &c.host), (&c.source, &c.host), (&c.host, &c.source)] {
            if needle.len() < DEFAULT_K {
                continue;
            }
            let got = containment(&fp(needle), &fp(hay)).unwrap();
            let want = kgram::containment(needle, hay, DEFAULT_K);
            assert_eq!(got, want, "case {case}");
        }
    }
}

#[test]
fn two_hundred_tokens_with_thirty_planted() {
    let mut rng = StdRng::seed_from_u64(30);
    for _ in 0..50 {
        let mut hay = random_tokens(&mut rng, 170);
        let snippet = random_tokens(&mut rng, 30);
        hay.splice(80..80, snippet.iter().cloned());
        assert_eq!(hay.len(), 200);
        let want = kgram::containment(&snippet, &hay, DEFAULT_K);
        assert_eq!(want, 1.0);
        assert_eq!(containment(&fp(&snippet), &fp(&hay)).unwrap(), want);
        let back = kgram::containment(&hay, &snippet, DEFAULT_K);
        assert_eq!(containment(&fp(&hay), &fp(&snippet)).unwrap(), back);
    }
}

#[test]
fn planted_copy_lower_bound() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    for case in 0..200 {
        let c = planted_case(&mut rng, DEFAULT_K);
        assert_eq!(containment(&fp(&c.plant), &fp(&c.host)).unwrap(), 1.0, "case {case}");
        let f_grams = (c.source.len() + 1 - DEFAULT_K) as f64;
        let bound = 0.10 - (DEFAULT_K - 1) as f64 / f_grams;
        let got = containment(&fp(&c.source), &fp(&c.host)).unwrap();
        assert!(got >= bound, "case {case}: {got} < {bound}");
    }
}

/// C sources tokenized by hand.
const C_SAMPLES: &[(&str, &[&str])] = &[
    (
        "int main(void) { /* entry */ return 0; }",
        &["int", "main", "(", "void", ")", "{", "return", "0", ";", "}"],
    ),
    (
        "/* header\n * spanning lines\n */\n#include <stdio.h>\n",
        &["#", "include", "<", "stdio", ".", "h", ">"],
    ),
    (
        "x = a/*mid*/+b; // tail",
        &["x", "=", "a", "+", "b", ";"],
    ),
    (
        "char *s = \"/* not a comment */\";",
        &["char", "*", "s", "=", "\"/* not a comment */\"", ";"],
    ),
    (
        "for (i = 0; i < n; i++) sum += v[i];",
        &["for", "(", "i", "=", "0", ";", "i", "<", "n", ";", "i", "++", ")", "sum", "+=", "v", "[", "i", "]", ";"],
    ),
    (
        "p->next = NULL; /**/ q = p",
        &["p", "->", "next", "=", "NULL", ";", "q", "=", "p"],
    ),
    (
        "if (a == b && c != d) { x <<= 2; }",
        &["if", "(", "a", "==", "b", "&&", "c", "!=", "d", ")", "{", "x", "<<=", "2", ";", "}"],
    ),
    (
        "float f = 3.14f; /* pi\r\n approx */ char c = '\\'';",
        &["float", "f", "=", "3.14f", ";", "char", "c", "=", "'\\''", ";"],
    ),
    (
        "/* unterminated comment at end of file",
        &[],
    ),
    (
        "static int count_bits(unsigned x) {\n\tint n = 0; /* loop */\n\twhile (x) { n += x & 1; x >>= 1; }\n\treturn n;\n}\n",
        &[
            "static", "int", "count_bits", "(", "unsigned", "x", ")", "{", "int", "n", "=", "0", ";",
            "while", "(", "x", ")", "{", "n", "+=", "x", "&", "1", ";", "x", ">>=", "1", ";", "}",
            "return", "n", ";", "}",
        ],
    ),
];

#[test]
fn c_block_comments_match_hand_tokenization() {
    for (i, (text, want)) in C_SAMPLES.iter().enumerate() {
        let got = tokenize(text, "c").tokens;
        assert_eq!(got, *want, "sample {i}");
    }
}
