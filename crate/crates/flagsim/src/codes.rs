//! CSS code model, the built-in catalog, and logical-failure classification.
//!
//! Generator ordering is part of a code's identity: syndrome bit positions,
//! lookup tables, and the golden tables all index generators in the order the
//! code lists them.

use crate::gf2::{symplectic_row, EchelonBasis};
use crate::pauli::{syndrome_of, PauliOperator, PauliType, Syndrome, P};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Classification of a residual data error with respect to a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualClass {
    /// The identity.
    Trivial,
    /// Zero syndrome and inside the stabilizer group: acts trivially on the
    /// code space.
    StabilizerEquivalent,
    /// Zero syndrome but outside the stabilizer group: a logical error on at
    /// least one encoded qubit.
    Logical,
    /// Nonzero syndrome: visible to a later extraction round.
    Detectable,
}

/// An `[[n, k, d]]` CSS code with ordered stabilizer generators.
#[derive(Clone, Serialize, Deserialize)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// All generators in the listed order, each pure X- or Z-type.
    gens: Vec<PauliOperator>,
    gen_types: Vec<PauliType>,
    /// Indices into `gens` of the X-type (resp. Z-type) generators, in order.
    x_idx: Vec<usize>,
    z_idx: Vec<usize>,
    pub logical_x: Vec<PauliOperator>,
    pub logical_z: Vec<PauliOperator>,
    #[serde(skip)]
    stab_basis: Option<EchelonBasis>,
}

impl CssCode {
    /// Builds a code from named generator strings and fills in logical
    /// representatives by brute-force search. The declared distance is
    /// verified exactly.
    pub fn new(name: &str, n: usize, k: usize, d: usize, generators: &[&str]) -> Result<CssCode> {
        let mut gens = Vec::new();
        let mut gen_types = Vec::new();
        for s in generators {
            let g = PauliOperator::parse(s, n)?;
            let ty = g
                .pure_type()
                .ok_or_else(|| Error::MixedType(s.to_string()))?;
            gens.push(g);
            gen_types.push(ty);
        }
        let mut code = CssCode {
            name: name.to_string(),
            n,
            k,
            d,
            x_idx: gen_types
                .iter()
                .enumerate()
                .filter(|(_, t)| **t == PauliType::X)
                .map(|(i, _)| i)
                .collect(),
            z_idx: gen_types
                .iter()
                .enumerate()
                .filter(|(_, t)| **t == PauliType::Z)
                .map(|(i, _)| i)
                .collect(),
            gens,
            gen_types,
            logical_x: Vec::new(),
            logical_z: Vec::new(),
            stab_basis: None,
        };
        code.validate_generators()?;
        code.find_logicals()?;
        Ok(code)
    }

    /// The paper catalog. Generator lists and their ordering are exactly as
    /// published for each code.
    pub fn catalog(name: &str) -> Result<CssCode> {
        match name {
            "422" => CssCode::new("422", 4, 2, 2, &["X1X2X3X4", "Z1Z2Z3Z4"]),
            "steane713" => CssCode::new(
                "steane713",
                7,
                1,
                3,
                &[
                    "X1X3X5X7", "Z2Z3Z6Z7", "Z4Z5Z6Z7", "Z1Z3Z5Z7", "X2X3X6X7", "X4X5X6X7",
                ],
            ),
            "shor913" => CssCode::new(
                "shor913",
                9,
                1,
                3,
                &[
                    "Z1Z2",
                    "Z2Z3",
                    "Z4Z5",
                    "Z5Z6",
                    "Z7Z8",
                    "Z8Z9",
                    "X1X2X3X4X5X6",
                    "X4X5X6X7X8X9",
                ],
            ),
            "rm1513" => CssCode::new(
                "rm1513",
                15,
                1,
                3,
                &[
                    "Z1Z3Z5Z7Z9Z11Z13Z15",
                    "Z2Z3Z6Z7Z10Z11Z14Z15",
                    "Z4Z5Z6Z7Z12Z13Z14Z15",
                    "Z8Z9Z10Z11Z12Z13Z14Z15",
                    "Z3Z7Z11Z15",
                    "Z5Z7Z13Z15",
                    "Z6Z7Z14Z15",
                    "Z10Z11Z14Z15",
                    "Z12Z13Z14Z15",
                    "Z9Z11Z13Z15",
                    "X1X3X5X7X9X11X13X15",
                    "X2X3X6X7X10X11X14X15",
                    "X4X5X6X7X12X13X14X15",
                    "X8X9X10X11X12X13X14X15",
                ],
            ),
            other => Err(Error::UnknownCode(other.to_string())),
        }
    }

    /// Loads codes from a structured text definition. Format, one code per
    /// block separated by blank lines:
    ///
    /// ```text
    /// code <name> n=<n> k=<k> d=<d>
    /// gen <pauli string>
    /// gen <pauli string>
    /// ```
    pub fn from_definition(text: &str) -> Result<Vec<CssCode>> {
        let mut out = Vec::new();
        let mut header: Option<(String, usize, usize, usize)> = None;
        let mut gens: Vec<String> = Vec::new();
        let flush = |header: &mut Option<(String, usize, usize, usize)>,
                         gens: &mut Vec<String>|
         -> Result<Option<CssCode>> {
            if let Some((name, n, k, d)) = header.take() {
                let refs: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
                let code = CssCode::new(&name, n, k, d, &refs)?;
                gens.clear();
                return Ok(Some(code));
            }
            gens.clear();
            Ok(None)
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("code ") {
                if let Some(code) = flush(&mut header, &mut gens)? {
                    out.push(code);
                }
                let mut name = String::new();
                let (mut n, mut k, mut d) = (0usize, 0usize, 0usize);
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n=") {
                        n = v.parse().map_err(|_| Error::Parse(tok.into()))?;
                    } else if let Some(v) = tok.strip_prefix("k=") {
                        k = v.parse().map_err(|_| Error::Parse(tok.into()))?;
                    } else if let Some(v) = tok.strip_prefix("d=") {
                        d = v.parse().map_err(|_| Error::Parse(tok.into()))?;
                    } else {
                        name = tok.to_string();
                    }
                }
                if name.is_empty() {
                    return Err(Error::Parse(format!("code line missing name: `{line}`")));
                }
                header = Some((name, n, k, d));
            } else if let Some(rest) = line.strip_prefix("gen ") {
                gens.push(rest.to_string());
            } else {
                return Err(Error::Parse(format!("unrecognized line `{line}`")));
            }
        }
        if let Some(code) = flush(&mut header, &mut gens)? {
            out.push(code);
        }
        Ok(out)
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    pub fn generator_type(&self, i: usize) -> PauliType {
        self.gen_types[i]
    }

    /// Indices (into the full generator list) of the X-type generators.
    pub fn x_indices(&self) -> &[usize] {
        &self.x_idx
    }

    pub fn z_indices(&self) -> &[usize] {
        &self.z_idx
    }

    pub fn x_gens(&self) -> Vec<&PauliOperator> {
        self.x_idx.iter().map(|&i| &self.gens[i]).collect()
    }

    pub fn z_gens(&self) -> Vec<&PauliOperator> {
        self.z_idx.iter().map(|&i| &self.gens[i]).collect()
    }

    /// Number of X-type generators (`x` in the budget bound).
    pub fn num_x(&self) -> usize {
        self.x_idx.len()
    }

    pub fn num_z(&self) -> usize {
        self.z_idx.len()
    }

    /// Full syndrome in listed generator order.
    pub fn syndrome(&self, e: &PauliOperator) -> Result<Syndrome> {
        syndrome_of(e, &self.gens)
    }

    /// Syndrome against the X-type generators only (detects Z components).
    pub fn syndrome_x_gens(&self, e: &PauliOperator) -> Result<Syndrome> {
        let mut s = Syndrome::zero(self.x_idx.len());
        for (j, &i) in self.x_idx.iter().enumerate() {
            s.set(j, !e.commutes(&self.gens[i])?);
        }
        Ok(s)
    }

    /// Syndrome against the Z-type generators only (detects X components).
    pub fn syndrome_z_gens(&self, e: &PauliOperator) -> Result<Syndrome> {
        let mut s = Syndrome::zero(self.z_idx.len());
        for (j, &i) in self.z_idx.iter().enumerate() {
            s.set(j, !e.commutes(&self.gens[i])?);
        }
        Ok(s)
    }

    fn basis(&self) -> &EchelonBasis {
        self.stab_basis
            .as_ref()
            .expect("stabilizer basis built during construction")
    }

    /// True iff `e` is in the stabilizer group, decided by GF(2) rank.
    pub fn in_stabilizer_group(&self, e: &PauliOperator) -> bool {
        self.basis().contains(symplectic_row(e))
    }

    /// Classifies a residual error on the data qubits. For `k = 2`, any
    /// zero-syndrome non-stabilizer residual counts as logical on some
    /// encoded qubit.
    pub fn classify_residual(&self, e: &PauliOperator) -> ResidualClass {
        if e.is_identity() {
            return ResidualClass::Trivial;
        }
        let s = self.syndrome(e).expect("residual acts on the data qubits");
        if !s.is_zero() {
            return ResidualClass::Detectable;
        }
        if self.in_stabilizer_group(e) {
            ResidualClass::StabilizerEquivalent
        } else {
            ResidualClass::Logical
        }
    }

    /// True iff `a` and `b` differ by a stabilizer.
    pub fn coset_equal(&self, a: &PauliOperator, b: &PauliOperator) -> bool {
        match a.multiply(b) {
            Ok(prod) => prod.is_identity() || self.in_stabilizer_group(&prod),
            Err(_) => false,
        }
    }

    fn validate_generators(&mut self) -> Result<()> {
        if self.gens.len() != self.n - self.k {
            return Err(Error::BadCode(format!(
                "{}: expected {} generators, got {}",
                self.name,
                self.n - self.k,
                self.gens.len()
            )));
        }
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::BadCode(format!(
                        "{}: generators {a} and {b} anticommute",
                        self.name
                    )));
                }
            }
        }
        let basis = EchelonBasis::from_rows(self.gens.iter().map(symplectic_row));
        if basis.rank() != self.gens.len() {
            return Err(Error::BadCode(format!(
                "{}: generators are not independent",
                self.name
            )));
        }
        self.stab_basis = Some(basis);
        Ok(())
    }

    /// Brute-force search for logical representatives in increasing weight,
    /// plus exact verification of the declared distance.
    ///
    /// For a CSS code a minimum-weight logical can be taken pure-type, so the
    /// representative search runs over pure X-type and pure Z-type operators;
    /// the distance check additionally sweeps every Pauli of weight `< d`.
    fn find_logicals(&mut self) -> Result<()> {
        let logical_x = self.pure_type_logicals(PauliType::X)?;
        let logical_z = self.pure_type_logicals(PauliType::Z)?;
        if logical_x.len() < self.k || logical_z.len() < self.k {
            return Err(Error::BadCode(format!(
                "{}: found only {} X / {} Z independent logicals, need {}",
                self.name,
                logical_x.len(),
                logical_z.len(),
                self.k
            )));
        }
        let (logical_x, logical_z) = self.pair_logicals(logical_x, logical_z)?;

        // Distance check: no normalizer element outside the group may have
        // weight < d, and one of weight exactly d must exist.
        let min_found = logical_x
            .iter()
            .chain(&logical_z)
            .map(|l| l.weight())
            .min()
            .unwrap();
        if self.any_low_weight_logical(self.d)? {
            return Err(Error::BadCode(format!(
                "{}: logical operator below declared distance {}",
                self.name, self.d
            )));
        }
        if min_found != self.d {
            return Err(Error::BadCode(format!(
                "{}: minimum logical weight found {} != declared d={}",
                self.name, min_found, self.d
            )));
        }
        self.logical_x = logical_x;
        self.logical_z = logical_z;
        Ok(())
    }

    /// Exhaustively checks all Paulis of weight < `d` for normalizer elements
    /// outside the stabilizer group.
    fn any_low_weight_logical(&self, d: usize) -> Result<bool> {
        let mut supports: Vec<Vec<usize>> = Vec::new();
        let mut current = Vec::new();
        gen_supports(self.n, d.saturating_sub(1), 0, &mut current, &mut supports);
        for support in supports {
            if support.is_empty() {
                continue;
            }
            let combos = 3usize.pow(support.len() as u32);
            for mut c in 0..combos {
                let mut e = PauliOperator::identity(self.n);
                for &q in &support {
                    let p = match c % 3 {
                        0 => P::X,
                        1 => P::Y,
                        _ => P::Z,
                    };
                    e.apply(q, p);
                    c /= 3;
                }
                if self.syndrome(&e)?.is_zero() && !self.in_stabilizer_group(&e) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Searches pure-type operators in increasing weight for `k` independent
    /// normalizer elements outside the stabilizer group.
    fn pure_type_logicals(&self, ty: PauliType) -> Result<Vec<PauliOperator>> {
        let mut found: Vec<PauliOperator> = Vec::new();
        let mut span = self.basis().clone();
        for w in 1..=self.n {
            let mut supports = Vec::new();
            let mut current = Vec::new();
            gen_supports_exact(self.n, w, 0, &mut current, &mut supports);
            for support in supports {
                let e = PauliOperator::from_support(self.n, ty, &support);
                if !self.syndrome(&e)?.is_zero() {
                    continue;
                }
                if span.insert(symplectic_row(&e)) {
                    found.push(e);
                    if found.len() == self.k {
                        return Ok(found);
                    }
                }
            }
        }
        Ok(found)
    }

    /// Arranges logicals so `logical_x[j]` anticommutes with `logical_z[j]`
    /// and commutes with every other representative (symplectic pairing over
    /// the quotient group).
    fn pair_logicals(
        &self,
        mut lx: Vec<PauliOperator>,
        mut lz: Vec<PauliOperator>,
    ) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
        for j in 0..self.k {
            // Find a Z partner anticommuting with lx[j].
            let pos = (j..lz.len())
                .find(|&i| !lx[j].commutes(&lz[i]).unwrap())
                .ok_or_else(|| {
                    Error::BadCode(format!("{}: cannot pair logical {}", self.name, lx[j]))
                })?;
            lz.swap(j, pos);
            // Clean anticommutations with the chosen pair out of the rest.
            for i in j + 1..self.k {
                if !lx[i].commutes(&lz[j]).unwrap() {
                    lx[i] = lx[i].multiply(&lx[j]).unwrap();
                }
                if !lz[i].commutes(&lx[j]).unwrap() {
                    lz[i] = lz[i].multiply(&lz[j]).unwrap();
                }
            }
        }
        lx.truncate(self.k);
        lz.truncate(self.k);
        Ok((lx, lz))
    }
}

fn gen_supports_exact(
    n: usize,
    w: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == w {
        out.push(current.clone());
        return;
    }
    for q in start..n {
        if n - q < w - current.len() {
            break;
        }
        current.push(q);
        gen_supports_exact(n, w, q + 1, current, out);
        current.pop();
    }
}

fn gen_supports(
    n: usize,
    max_w: usize,
    _start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    for w in 1..=max_w {
        gen_supports_exact(n, w, 0, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliType;

    #[test]
    fn catalog_shapes() {
        let shor = CssCode::catalog("shor913").unwrap();
        assert_eq!((shor.n, shor.k, shor.d), (9, 1, 3));
        assert_eq!(shor.num_x(), 2);
        assert_eq!(shor.num_z(), 6);
        assert_eq!(shor.generators()[0].to_string(), "Z1Z2");
        assert_eq!(shor.generators()[6].to_string(), "X1X2X3X4X5X6");

        let rm = CssCode::catalog("rm1513").unwrap();
        assert_eq!((rm.num_x(), rm.num_z()), (4, 10));

        let c422 = CssCode::catalog("422").unwrap();
        assert_eq!((c422.n, c422.k, c422.d), (4, 2, 2));
        assert_eq!(c422.generators().len(), 2);

        let steane = CssCode::catalog("steane713").unwrap();
        assert_eq!(steane.generator_type(0), PauliType::X);
        assert_eq!(steane.generator_type(1), PauliType::Z);

        assert!(CssCode::catalog("css999").is_err());
    }

    #[test]
    fn logical_search_verifies_distance() {
        // Shor's code: brute-force search must confirm d = 3.
        let shor = CssCode::catalog("shor913").unwrap();
        assert_eq!(shor.logical_x.len(), 1);
        assert_eq!(shor.logical_z.len(), 1);
        assert!(!shor.logical_x[0].commutes(&shor.logical_z[0]).unwrap());

        // Steane has a weight-3 logical X representative.
        let steane = CssCode::catalog("steane713").unwrap();
        assert_eq!(steane.logical_x[0].weight(), 3);

        // The [[4,2,2]] name forces d = 2 and the search confirms it.
        let c422 = CssCode::catalog("422").unwrap();
        assert_eq!(c422.logical_x.len(), 2);
        for j in 0..2 {
            assert!(!c422.logical_x[j].commutes(&c422.logical_z[j]).unwrap());
            assert!(c422.logical_x[j].commutes(&c422.logical_z[1 - j]).unwrap());
        }

        // A deliberately wrong distance is rejected.
        assert!(CssCode::new("bad", 4, 2, 3, &["X1X2X3X4", "Z1Z2Z3Z4"]).is_err());
    }

    #[test]
    fn classify_residual_cases() {
        let c422 = CssCode::catalog("422").unwrap();
        let full_x = PauliOperator::parse("X1X2X3X4", 4).unwrap();
        let full_z = PauliOperator::parse("Z1Z2Z3Z4", 4).unwrap();
        assert_eq!(
            c422.classify_residual(&full_x),
            ResidualClass::StabilizerEquivalent
        );
        assert_eq!(
            c422.classify_residual(&full_z),
            ResidualClass::StabilizerEquivalent
        );
        assert_eq!(
            c422.classify_residual(&PauliOperator::identity(4)),
            ResidualClass::Trivial
        );
        let x12 = PauliOperator::parse("X1X2", 4).unwrap();
        assert_eq!(c422.classify_residual(&x12), ResidualClass::Logical);
        let x1 = PauliOperator::parse("X1", 4).unwrap();
        assert_eq!(c422.classify_residual(&x1), ResidualClass::Detectable);
    }

    #[test]
    fn coset_invariance_of_classification() {
        let shor = CssCode::catalog("shor913").unwrap();
        let e = PauliOperator::parse("X2X4X6", 9).unwrap();
        let base = shor.classify_residual(&e);
        for g in shor.generators() {
            let shifted = e.multiply(g).unwrap();
            assert_eq!(shor.classify_residual(&shifted), base);
        }
    }

    #[test]
    fn definition_text_round_trip() {
        let text = "\
# a comment
code 422 n=4 k=2 d=2
gen X1X2X3X4
gen Z1Z2Z3Z4
";
        let codes = CssCode::from_definition(text).unwrap();
        assert_eq!(codes.len(), 1);
        assert_eq!(codes[0].name, "422");
        assert_eq!(codes[0].k, 2);
    }
}
