//! Extended FCIDUMP text format for multicomponent integral sets.
//!
//! A file is a sequence of namelist headers, each followed by integral lines.
//! A header starts with `&NAME`, holds `KEY=VALUE` pairs separated by commas,
//! and ends with `/` (it may span several lines). Indices are 1-based.
//!
//! ```text
//! &NEO NSPECIES=2, ENUC=0.0, REPR=MO /
//! &FCI NORB=2, NELEC=2, MS2=0, SPECIES=electron, MASS=1, CHARGE=-1, SPINORB=2 /
//!   value  i j k l      (ij|kl) within the species
//!   value  i j 0 0      one-body h_ij
//! &OVERLAP /
//!   value  i j 0 0      overlap S_ij of the preceding &FCI species
//! &FCI NORB=2, NELEC=1, SPECIES=positron, MASS=1, CHARGE=1, SPINORB=1 /
//!   ...
//! &CROSS FIRST=1, SECOND=2 /
//!   value  i j K L      (ij|KL), i j index FIRST, K L index SECOND
//! &END
//! ```
//!
//! `&FCI` blocks appear in species order. `&CROSS` blocks follow all species.
//! Every nonzero tensor entry is written, not only the symmetry-unique ones,
//! and entries absent from the file are zero. Values use the shortest
//! representation that parses back to the identical `f64`, so a write/read
//! cycle is lossless. `MS2` is informational and ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::basis::{ParticleSpecies, SpeciesKind};
use crate::error::{Error, Result};
use crate::integrals::{CrossIntegrals, IntegralSet, Representation, SpeciesIntegrals, Tensor4};

pub fn write_fcidump(ints: &IntegralSet) -> String {
    let mut s = String::new();
    let repr = match ints.representation {
        Representation::Ao => "AO",
        Representation::Mo => "MO",
    };
    let _ = writeln!(s, "&NEO NSPECIES={}, ENUC={:e}, REPR={repr} /", ints.species.len(), ints.e_nn);
    for b in &ints.species {
        let sp = &b.species;
        let ms2 = if sp.spin_orbitals_per_spatial == 2 { sp.count % 2 } else { sp.count };
        let _ = writeln!(
            s,
            "&FCI NORB={}, NELEC={}, MS2={ms2}, SPECIES={}, MASS={:e}, CHARGE={:e}, SPINORB={} /",
            b.dim(),
            sp.count,
            sp.kind,
            sp.mass,
            sp.charge,
            sp.spin_orbitals_per_spatial
        );
        write_tensor(&mut s, &b.eri);
        write_matrix(&mut s, &b.h1);
        s.push_str("&OVERLAP /\n");
        write_matrix(&mut s, &b.overlap);
    }
    for c in &ints.cross {
        let _ = writeln!(s, "&CROSS FIRST={}, SECOND={} /", c.first + 1, c.second + 1);
        write_tensor(&mut s, &c.eri);
    }
    s.push_str("&END\n");
    s
}

fn write_tensor(s: &mut String, t: &Tensor4) {
    let [a, b, c, d] = t.dims();
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                for l in 0..d {
                    let v = t.get(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(s, "{v:>24e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
}

fn write_matrix(s: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(s, "{v:>24e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
}

enum Section {
    None,
    Species(usize),
    Overlap(usize),
    Cross(usize),
    End,
}

struct Header {
    name: String,
    fields: BTreeMap<String, String>,
    line: usize,
}

impl Header {
    fn get(&self, key: &str) -> Result<&str> {
        self.fields.get(key).map(String::as_str).ok_or_else(|| Error::Parse {
            line: self.line,
            message: format!("&{} header lacks {key}", self.name),
        })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse().map_err(|_| Error::Parse {
            line: self.line,
            message: format!("bad {key} value {raw:?}"),
        })
    }
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    let body = text.trim().trim_start_matches('&');
    let body = body.strip_suffix('/').unwrap_or(body).trim();
    let (name, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
    let mut fields = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected KEY=VALUE, got {item:?}"),
        })?;
        fields.insert(k.trim().to_ascii_uppercase(), v.trim().trim_matches('\'').to_string());
    }
    Ok(Header {
        name: name.to_ascii_uppercase(),
        fields,
        line,
    })
}

pub fn read_fcidump(text: &str) -> Result<IntegralSet> {
    let mut species: Vec<SpeciesIntegrals> = Vec::new();
    let mut cross: Vec<CrossIntegrals> = Vec::new();
    let mut neo: Option<(usize, f64, Representation)> = None;
    let mut section = Section::None;
    let mut pending: Option<(String, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('!') || t.starts_with('#') {
            continue;
        }
        if let Some((buf, start)) = pending.as_mut() {
            buf.push(' ');
            buf.push_str(t);
            if !t.ends_with('/') {
                continue;
            }
            let h = parse_header(buf, *start)?;
            pending = None;
            section = open_section(h, &mut neo, &mut species, &mut cross)?;
            continue;
        }
        if t.starts_with('&') {
            if t.eq_ignore_ascii_case("&END") {
                section = Section::End;
                continue;
            }
            if t.ends_with('/') {
                section = open_section(parse_header(t, line)?, &mut neo, &mut species, &mut cross)?;
            } else {
                pending = Some((t.to_string(), line));
            }
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected `value i j k l`, got {} columns", cols.len()),
            });
        }
        let v: f64 = cols[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad value {:?}", cols[0]),
        })?;
        let mut ix = [0usize; 4];
        for (slot, c) in ix.iter_mut().zip(&cols[1..]) {
            *slot = c.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index {c:?}"),
            })?;
        }
        let oob = |what: &str| Error::Parse {
            line,
            message: format!("index out of range for {what}"),
        };
        match section {
            Section::Species(s) => {
                let b = &mut species[s];
                let n = b.dim();
                if ix[..2].iter().any(|&i| i == 0 || i > n) || ix[2..].iter().any(|&i| i > n) {
                    return Err(oob(b.species.kind.name()));
                }
                if ix[2] == 0 && ix[3] == 0 {
                    b.h1[(ix[0] - 1, ix[1] - 1)] = v;
                } else if ix[2] == 0 || ix[3] == 0 {
                    return Err(oob(b.species.kind.name()));
                } else {
                    b.eri.set(ix[0] - 1, ix[1] - 1, ix[2] - 1, ix[3] - 1, v);
                }
            }
            Section::Overlap(s) => {
                let b = &mut species[s];
                let n = b.dim();
                if ix[..2].iter().any(|&i| i == 0 || i > n) || ix[2] != 0 || ix[3] != 0 {
                    return Err(oob("overlap"));
                }
                b.overlap[(ix[0] - 1, ix[1] - 1)] = v;
            }
            Section::Cross(c) => {
                let dims = cross[c].eri.dims();
                if ix.iter().zip(dims).any(|(&i, d)| i == 0 || i > d) {
                    return Err(oob("cross block"));
                }
                cross[c].eri.set(ix[0] - 1, ix[1] - 1, ix[2] - 1, ix[3] - 1, v);
            }
            Section::None | Section::End => {
                return Err(Error::Parse {
                    line,
                    message: "integral line outside a block".into(),
                })
            }
        }
    }
    if pending.is_some() {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "unterminated header".into(),
        });
    }
    let (n, e_nn, representation) = neo.ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing &NEO header".into(),
    })?;
    if species.len() != n {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("&NEO declares {n} species, found {}", species.len()),
        });
    }
    Ok(IntegralSet {
        species,
        cross,
        e_nn,
        representation,
    })
}

fn open_section(
    h: Header,
    neo: &mut Option<(usize, f64, Representation)>,
    species: &mut Vec<SpeciesIntegrals>,
    cross: &mut Vec<CrossIntegrals>,
) -> Result<Section> {
    let err = |message: String| Error::Parse { line: h.line, message };
    match h.name.as_str() {
        "NEO" => {
            let repr = match h.get("REPR").unwrap_or("MO").to_ascii_uppercase().as_str() {
                "AO" => Representation::Ao,
                "MO" => Representation::Mo,
                other => return Err(err(format!("unknown REPR {other:?}"))),
            };
            *neo = Some((h.parse("NSPECIES")?, h.parse("ENUC")?, repr));
            Ok(Section::None)
        }
        "FCI" => {
            if neo.is_none() {
                return Err(err("&FCI before &NEO".into()));
            }
            if !cross.is_empty() {
                return Err(err("&FCI after &CROSS".into()));
            }
            let kind_name = h.get("SPECIES")?;
            let kind = SpeciesKind::parse(kind_name).ok_or_else(|| err(format!("unknown species {kind_name:?}")))?;
            let n: usize = h.parse("NORB")?;
            species.push(SpeciesIntegrals {
                species: ParticleSpecies {
                    kind,
                    mass: h.parse("MASS")?,
                    charge: h.parse("CHARGE")?,
                    count: h.parse("NELEC")?,
                    spin_orbitals_per_spatial: h.parse("SPINORB")?,
                },
                overlap: DMatrix::zeros(n, n),
                h1: DMatrix::zeros(n, n),
                eri: Tensor4::zeros([n; 4]),
            });
            Ok(Section::Species(species.len() - 1))
        }
        "OVERLAP" => match species.len() {
            0 => Err(err("&OVERLAP before any &FCI".into())),
            n if !cross.is_empty() => Err(err(format!("&OVERLAP after &CROSS (species {n})"))),
            n => Ok(Section::Overlap(n - 1)),
        },
        "CROSS" => {
            let (a, b): (usize, usize) = (h.parse("FIRST")?, h.parse("SECOND")?);
            if a == 0 || b == 0 || a > species.len() || b > species.len() || a == b {
                return Err(err(format!("bad species pair FIRST={a}, SECOND={b}")));
            }
            let (na, nb) = (species[a - 1].dim(), species[b - 1].dim());
            cross.push(CrossIntegrals {
                first: a - 1,
                second: b - 1,
                eri: Tensor4::zeros([na, na, nb, nb]),
            });
            Ok(Section::Cross(cross.len() - 1))
        }
        other => Err(err(format!("unknown header &{other}"))),
    }
}

pub fn save_fcidump(ints: &IntegralSet, path: &Path) -> Result<()> {
    std::fs::write(path, write_fcidump(ints))?;
    Ok(())
}

pub fn load_fcidump(path: &Path) -> Result<IntegralSet> {
    read_fcidump(&std::fs::read_to_string(path)?)
}
