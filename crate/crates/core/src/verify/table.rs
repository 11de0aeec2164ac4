//! The sixteen first-bit-0 codewords of RM(4,1) and their coefficients.

use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::dyadic::Dyadic;
use crate::runstats::coefficients;

/// `(codeword, alpha, beta, gamma)` in canonical dyadic text form.
pub const TABLE1: [(&str, &str, &str, &str); 16] = [
    ("0000000000000000", "458753/32768", "65519/32768", "0"),
    ("0000000011111111", "769/64", "247/16384", "65025/32768"),
    ("0000111100001111", "8929/1024", "1811/8192", "58275/32768"),
    ("0000111111110000", "336353/32768", "57869/32768", "3825/16384"),
    ("0011001100110011", "23593/4096", "655/1024", "44559/32768"),
    ("0011001111001100", "212153/32768", "44369/32768", "10575/16384"),
    ("0011110000111100", "251033/32768", "41939/32768", "5895/8192"),
    ("0011110011000011", "29101/4096", "11857/16384", "41805/32768"),
    ("0101010101010101", "36409/8192", "7279/8192", "36403/32768"),
    ("0101010110101010", "152861/32768", "36341/32768", "14589/16384"),
    ("0101101001011010", "164861/32768", "35591/32768", "3741/4096"),
    ("0101101010100101", "39809/8192", "14983/16384", "35553/32768"),
    ("0110011001100110", "175637/32768", "34067/32768", "7863/8192"),
    ("0110011010011001", "43259/8192", "15733/16384", "34053/32768"),
    ("0110100101101001", "42179/8192", "3967/4096", "33783/32768"),
    ("0110100110010110", "170741/32768", "33761/32768", "15879/16384"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDiff {
    pub codeword: BitSeq,
    pub coefficient: String,
    pub expected: Dyadic,
    pub actual: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub matches: usize,
    pub total: usize,
    pub diffs: Vec<TableDiff>,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty() && self.matches == self.total
    }

    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "exact" } else { "mismatched" };
        format!("{}/{} {verdict}", self.matches, self.total)
    }
}

/// Recompute every tabulated coefficient and compare exactly.
pub fn check_table1() -> TableReport {
    let mut report = TableReport {
        matches: 0,
        total: 0,
        diffs: Vec::new(),
    };
    for (word, alpha, beta, gamma) in TABLE1 {
        let x: BitSeq = word.parse().expect("table codeword");
        let c = coefficients(&x);
        for (name, text, actual) in [("alpha", alpha, c.alpha), ("beta", beta, c.beta), ("gamma", gamma, c.gamma)] {
            let expected: Dyadic = text.parse().expect("table entry");
            report.total += 1;
            if expected == actual {
                report.matches += 1;
            } else {
                report.diffs.push(TableDiff {
                    codeword: x.clone(),
                    coefficient: name.to_string(),
                    expected,
                    actual,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmcode::RmCodebook;
    use std::collections::HashSet;

    #[test]
    fn table_reproduces_exactly() {
        let r = check_table1();
        assert!(r.passed(), "{:?}", r.diffs);
        assert_eq!(r.summary(), "48/48 exact");
    }

    #[test]
    fn rows_are_the_first_bit_zero_half() {
        let c = RmCodebook::new(4).unwrap();
        let rows: HashSet<BitSeq> = TABLE1.iter().map(|r| r.0.parse().unwrap()).collect();
        let half: HashSet<BitSeq> = c.with_first_bit(false).iter().cloned().collect();
        assert_eq!(rows, half);
    }

    #[test]
    fn spot_rows() {
        let c = coefficients(&"0000111100001111".parse().unwrap());
        assert_eq!(c.alpha.to_string(), "8929/1024");
        assert_eq!(c.beta.to_string(), "1811/8192");
        assert_eq!(c.gamma.to_string(), "58275/32768");
        let c = coefficients(&"0101010101010101".parse().unwrap());
        assert_eq!(
            (c.alpha.to_string(), c.beta.to_string(), c.gamma.to_string()),
            ("36409/8192".into(), "7279/8192".into(), "36403/32768".into())
        );
    }
}
