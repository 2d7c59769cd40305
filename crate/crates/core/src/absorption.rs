//! Molecular absorption coefficient providers and LoS transmittance.
//!
//! Units: frequencies in Hz, distances in m, `k` in 1/m with the natural-log
//! convention `a = exp(-k d)`.
//!
//! Tabulated coefficients are read from a CSV file with the header
//! `frequency_hz,k_per_m` and rows in strictly ascending frequency order.
//! Lookups between rows are piecewise linear; lookups outside the table fail.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Source of the absorption coefficient k(f).
#[derive(Debug, Clone, PartialEq)]
pub enum AbsorptionProvider<T> {
    /// Frequency-independent coefficient.
    Constant(T),
    /// Piecewise-linear table of `(frequency_hz, k_per_m)` rows.
    Table(AbsorptionTable<T>),
}

/// Validated absorption table: at least two rows, strictly increasing
/// frequency, finite non-negative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTable<T> {
    rows: Vec<(T, T)>,
}

impl<T: Real> AbsorptionTable<T> {
    pub fn new(rows: Vec<(T, T)>) -> Result<Self> {
        Self::validated(rows, |i| format!("row {}", i + 1))
    }

    fn validated(rows: Vec<(T, T)>, locate: impl Fn(usize) -> String) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Table {
                location: "table".into(),
                reason: format!("need at least 2 rows, got {}", rows.len()),
            });
        }
        for (i, &(f, k)) in rows.iter().enumerate() {
            let location = locate(i);
            if !f.is_finite() || !k.is_finite() {
                return Err(Error::Table {
                    location,
                    reason: "non-finite value".into(),
                });
            }
            if k < T::zero() {
                return Err(Error::Table {
                    location,
                    reason: format!("negative absorption coefficient {k}"),
                });
            }
            if i > 0 {
                let prev = rows[i - 1].0;
                if f == prev {
                    return Err(Error::Table {
                        location,
                        reason: format!("duplicate frequency {f}"),
                    });
                }
                if f < prev {
                    return Err(Error::Table {
                        location,
                        reason: format!("frequency {f} is below the previous row {prev}"),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(T, T)] {
        &self.rows
    }

    pub fn frequency_range(&self) -> (T, T) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    /// Parses the `frequency_hz,k_per_m` CSV format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header_err = |reason: String| Error::Table {
            location: "header".into(),
            reason,
        };
        let headers = rdr.headers().map_err(|e| header_err(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "frequency_hz" || &headers[1] != "k_per_m" {
            return Err(header_err(format!(
                "expected `frequency_hz,k_per_m`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            // header is line 1
            let location = format!("line {}", i + 2);
            let record = record.map_err(|e| Error::Table {
                location: location.clone(),
                reason: e.to_string(),
            })?;
            if record.len() != 2 {
                return Err(Error::Table {
                    location,
                    reason: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let parse = |s: &str| -> Result<T> {
                let v: f64 = s.parse().map_err(|_| Error::Table {
                    location: location.clone(),
                    reason: format!("`{s}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Table {
                        location: location.clone(),
                        reason: format!("`{s}` is not finite"),
                    });
                }
                Ok(T::of(v))
            };
            rows.push((parse(&record[0])?, parse(&record[1])?));
        }
        Self::validated(rows, |i| format!("line {}", i + 2))
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Table {
            location: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_csv_reader(file)
    }

    fn interpolate(&self, f: T) -> Result<T> {
        let (lo, hi) = self.frequency_range();
        if !(f >= lo && f <= hi) {
            return Err(Error::OutOfDomain {
                value: f.f64(),
                min: lo.f64(),
                max: hi.f64(),
            });
        }
        // first row with frequency >= f
        let idx = self.rows.partition_point(|&(rf, _)| rf < f);
        let (f1, k1) = self.rows[idx];
        if f1 == f || idx == 0 {
            return Ok(k1);
        }
        let (f0, k0) = self.rows[idx - 1];
        let t = (f - f0) / (f1 - f0);
        Ok(k0 + t * (k1 - k0))
    }
}

impl<T: Real> AbsorptionProvider<T> {
    pub fn constant(k: T) -> Result<Self> {
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::invalid("k", format!("must be finite and >= 0, got {k}")));
        }
        Ok(AbsorptionProvider::Constant(k))
    }

    /// k(f) in 1/m.
    pub fn absorption_at(&self, frequency: T) -> Result<T> {
        match self {
            AbsorptionProvider::Constant(k) => Ok(*k),
            AbsorptionProvider::Table(table) => table.interpolate(frequency),
        }
    }
}

/// LoS transmittance `exp(-k d)`.
pub fn transmittance<T: Real>(k: T, distance: T) -> Result<T> {
    if !(k >= T::zero()) {
        return Err(Error::invalid("k", format!("must be >= 0, got {k}")));
    }
    if !(distance > T::zero()) {
        return Err(Error::invalid(
            "distance",
            format!("must be > 0, got {distance}"),
        ));
    }
    Ok((-k * distance).exp())
}

/// Absorption coefficient, link distance and the resulting transmittance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec<T> {
    pub k: T,
    pub distance: T,
    pub transmittance: T,
}

impl<T: Real> MediumSpec<T> {
    pub fn new(k: T, distance: T) -> Result<Self> {
        Ok(Self {
            k,
            distance,
            transmittance: transmittance(k, distance)?,
        })
    }

    pub fn from_provider(
        provider: &AbsorptionProvider<T>,
        frequency: T,
        distance: T,
    ) -> Result<Self> {
        Self::new(provider.absorption_at(frequency)?, distance)
    }

    /// Fraction of the power absorbed along the LoS path, `1 - a`,
    /// evaluated without cancellation for small `k d`.
    pub fn absorbed_fraction(&self) -> T {
        -(-self.k * self.distance).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> AbsorptionProvider<f64> {
        AbsorptionProvider::Table(
            AbsorptionTable::new(vec![(100e9, 0.001), (300e9, 0.003)]).unwrap(),
        )
    }

    #[test]
    fn constant_provider() {
        let p = AbsorptionProvider::constant(0.01).unwrap();
        assert_eq!(p.absorption_at(300e9).unwrap(), 0.01);
        assert!(AbsorptionProvider::constant(-1.0).is_err());
    }

    #[test]
    fn table_midpoint_and_knots() {
        let p = table();
        assert!((p.absorption_at(200e9).unwrap() - 0.002).abs() < 1e-18);
        assert_eq!(p.absorption_at(100e9).unwrap(), 0.001);
        assert_eq!(p.absorption_at(300e9).unwrap(), 0.003);
    }

    #[test]
    fn table_no_extrapolation() {
        let p = table();
        assert!(matches!(
            p.absorption_at(400e9),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(p.absorption_at(50e9).is_err());
        assert!(p.absorption_at(f64::NAN).is_err());
    }

    #[test]
    fn transmittance_examples() {
        assert_eq!(transmittance(0.0, 10.0).unwrap(), 1.0);
        assert!((transmittance(2f64.ln() / 10.0, 10.0).unwrap() - 0.5).abs() < 1e-15);
        // exp(-0.233) = 0.79215357352431400266... (40-digit reference)
        let a = transmittance(0.0233_f64, 10.0).unwrap();
        assert!((a - 0.792_153_573_524_314).abs() < 1e-15);
        assert!(transmittance(-0.1, 10.0).is_err());
        assert!(transmittance(0.1, 0.0).is_err());
    }

    #[test]
    fn csv_parsing() {
        let ok = "frequency_hz,k_per_m\n1e11,0.001\n2e11,0.002\n3e11,0.004\n";
        let t = AbsorptionTable::<f64>::from_csv_reader(ok.as_bytes()).unwrap();
        assert_eq!(t.rows().len(), 3);

        let bad = [
            "freq,k\n1,2\n3,4\n",
            "frequency_hz,k_per_m\n1e11,0.001\n",
            "frequency_hz,k_per_m\n1e11,0.001\n1e11,0.002\n",
            "frequency_hz,k_per_m\n2e11,0.001\n1e11,0.002\n",
            "frequency_hz,k_per_m\n1e11,NaN\n2e11,0.002\n",
            "frequency_hz,k_per_m\n1e11,-0.1\n2e11,0.002\n",
            "frequency_hz,k_per_m\n1e11,abc\n2e11,0.002\n",
        ];
        for src in bad {
            assert!(
                AbsorptionTable::<f64>::from_csv_reader(src.as_bytes()).is_err(),
                "accepted {src:?}"
            );
        }
        let err = AbsorptionTable::<f64>::from_csv_reader(
            "frequency_hz,k_per_m\n1e11,0.1\n3e11,0.2\n2e11,0.3\n".as_bytes(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    proptest! {
        #[test]
        fn transmittance_is_multiplicative(k in 0.0..1.0f64, d1 in 0.01..100.0f64, d2 in 0.01..100.0f64) {
            let whole = transmittance(k, d1 + d2).unwrap();
            let split = transmittance(k, d1).unwrap() * transmittance(k, d2).unwrap();
            prop_assert!((whole - split).abs() <= 1e-13 * whole.max(1e-300) + 1e-300);
            prop_assert!(whole > 0.0 && whole <= 1.0);
        }

        #[test]
        fn table_reproduces_knots(ks in proptest::collection::vec(0.0..1.0f64, 2..10)) {
            let rows: Vec<_> = ks.iter().enumerate().map(|(i, &k)| (1e11 + 1e10 * i as f64, k)).collect();
            let p = AbsorptionProvider::Table(AbsorptionTable::new(rows.clone()).unwrap());
            for (f, k) in rows {
                prop_assert_eq!(p.absorption_at(f).unwrap(), k);
            }
        }
    }
}
