//! Binary snapshot log.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! header   magic "SHADOWLG" (8) | version u32 | num_qubits u32
//!          | ensemble u8 (0 local-clifford, 1 local-haar, 2 global-haar)
//!          | policy u8 (0 full, 1 fixed, 2 random) | policy payload
//!          | master_seed u64 | count u64
//! payload  fixed: u16 n, n x u8 site ; random: u16 size ; full: nothing
//! unitary  0 u8 clifford-index | 1 then 8 x f64 (re, im of u00 u01 u10 u11)
//! record   tag u8
//!   0 local-full  L x unitary | outcome u64 (site 0 = most significant bit)
//!   1 global      dim u32 | dim*dim x (re f64, im f64) row-major | outcome u64
//!   2 hybrid      n_A u8 | n_A x site u8 | n_A x unitary | outcome u64
//!                 | probability f64 | n_B u8 | 2^n_B x (re f64, im f64)
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::{Protocol, ShadowSet, Snapshot, SubsetPolicy};
use crate::ensembles::{EnsembleKind, SiteUnitary};
use crate::qcore::{MeasurementRecord, PureState};
use crate::{CMatrix, Error, Result};

pub const LOG_MAGIC: &[u8; 8] = b"SHADOWLG";
pub const LOG_VERSION: u32 = 1;

fn ensemble_code(e: EnsembleKind) -> u8 {
    match e {
        EnsembleKind::LocalClifford => 0,
        EnsembleKind::LocalHaar => 1,
        EnsembleKind::GlobalHaar => 2,
    }
}

fn put_complex(out: &mut Vec<u8>, z: Complex64) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}

fn put_unitary(out: &mut Vec<u8>, u: &SiteUnitary) {
    match u {
        SiteUnitary::Clifford(i) => out.extend_from_slice(&[0, *i]),
        SiteUnitary::Haar(m) => {
            out.push(1);
            for z in [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]] {
                put_complex(out, z);
            }
        }
    }
}

fn pack_bits(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub fn encode_snapshot_log(shadow: &ShadowSet) -> Result<Vec<u8>> {
    let l = shadow.num_qubits;
    let mut out = Vec::new();
    out.extend_from_slice(LOG_MAGIC);
    out.extend_from_slice(&LOG_VERSION.to_le_bytes());
    out.extend_from_slice(&(l as u32).to_le_bytes());
    out.push(ensemble_code(shadow.protocol.ensemble));
    match &shadow.protocol.policy {
        SubsetPolicy::Full => out.push(0),
        SubsetPolicy::Fixed(sites) => {
            out.push(1);
            out.extend_from_slice(&(sites.len() as u16).to_le_bytes());
            out.extend(sites.iter().map(|&s| s as u8));
        }
        SubsetPolicy::Random(size) => {
            out.push(2);
            out.extend_from_slice(&(*size as u16).to_le_bytes());
        }
    }
    out.extend_from_slice(&shadow.master_seed.to_le_bytes());
    out.extend_from_slice(&(shadow.len() as u64).to_le_bytes());

    for snapshot in &shadow.snapshots {
        match snapshot {
            Snapshot::LocalFull { unitaries, outcome } => {
                out.push(0);
                unitaries.iter().for_each(|u| put_unitary(&mut out, u));
                out.extend_from_slice(&pack_bits(outcome).to_le_bytes());
            }
            Snapshot::Global { unitary, outcome } => {
                out.push(1);
                let dim = unitary.nrows();
                out.extend_from_slice(&(dim as u32).to_le_bytes());
                for r in 0..dim {
                    for c in 0..dim {
                        put_complex(&mut out, unitary[(r, c)]);
                    }
                }
                out.extend_from_slice(&(*outcome as u64).to_le_bytes());
            }
            Snapshot::Hybrid { unitaries, record } => {
                out.push(2);
                out.push(record.subset.len() as u8);
                out.extend(record.subset.iter().map(|&s| s as u8));
                unitaries.iter().for_each(|u| put_unitary(&mut out, u));
                out.extend_from_slice(&pack_bits(&record.outcome).to_le_bytes());
                out.extend_from_slice(&record.probability.to_le_bytes());
                out.push(record.collapsed.num_qubits() as u8);
                for &z in record.collapsed.amplitudes() {
                    put_complex(&mut out, z);
                }
            }
        }
    }
    Ok(out)
}

/// Writes the log and returns the number of bytes written.
pub fn write_snapshot_log(shadow: &ShadowSet, path: impl AsRef<Path>) -> Result<u64> {
    let bytes = encode_snapshot_log(shadow)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(bytes.len() as u64)
}

pub fn read_snapshot_log(path: impl AsRef<Path>) -> Result<ShadowSet> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot_log(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::LogTruncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::LogTruncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn complex(&mut self) -> Result<Complex64> {
        Ok(Complex64::new(self.f64()?, self.f64()?))
    }

    fn unitary(&mut self) -> Result<SiteUnitary> {
        match self.u8()? {
            0 => {
                let i = self.u8()?;
                if i >= 24 {
                    return Err(Error::LogFormat(format!("clifford index {i}")));
                }
                Ok(SiteUnitary::Clifford(i))
            }
            1 => {
                let e = [self.complex()?, self.complex()?, self.complex()?, self.complex()?];
                Ok(SiteUnitary::Haar(Matrix2::new(e[0], e[1], e[2], e[3])))
            }
            t => Err(Error::LogFormat(format!("unitary tag {t}"))),
        }
    }
}

fn unpack_bits(packed: u64, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((packed >> (n - 1 - q)) & 1) as u8).collect()
}

pub fn decode_snapshot_log(bytes: &[u8]) -> Result<ShadowSet> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(LOG_MAGIC.len()).map_err(|_| Error::LogMagic)? != LOG_MAGIC {
        return Err(Error::LogMagic);
    }
    let version = r.u32()?;
    if version != LOG_VERSION {
        return Err(Error::LogVersion(version));
    }
    let l = r.u32()? as usize;
    if l > crate::qcore::MAX_QUBITS {
        return Err(Error::LogFormat(format!("{l} qubits")));
    }
    let ensemble = match r.u8()? {
        0 => EnsembleKind::LocalClifford,
        1 => EnsembleKind::LocalHaar,
        2 => EnsembleKind::GlobalHaar,
        e => return Err(Error::LogFormat(format!("ensemble code {e}"))),
    };
    let policy = match r.u8()? {
        0 => SubsetPolicy::Full,
        1 => {
            let n = r.u16()? as usize;
            SubsetPolicy::Fixed(r.take(n)?.iter().map(|&s| s as usize).collect())
        }
        2 => SubsetPolicy::Random(r.u16()? as usize),
        p => return Err(Error::LogFormat(format!("policy code {p}"))),
    };
    let protocol = Protocol { ensemble, policy };
    protocol
        .validate(l)
        .map_err(|e| Error::LogFormat(e.to_string()))?;
    let master_seed = r.u64()?;
    let count = r.u64()? as usize;

    let mut snapshots = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let snapshot = match r.u8()? {
            0 => {
                let unitaries = (0..l).map(|_| r.unitary()).collect::<Result<Vec<_>>>()?;
                let outcome = unpack_bits(r.u64()?, l);
                Snapshot::LocalFull { unitaries, outcome }
            }
            1 => {
                let dim = r.u32()? as usize;
                if dim != 1 << l {
                    return Err(Error::LogFormat(format!("global unitary dimension {dim}")));
                }
                let mut entries = Vec::with_capacity(dim * dim);
                for _ in 0..dim * dim {
                    entries.push(r.complex()?);
                }
                let unitary = CMatrix::from_row_slice(dim, dim, &entries);
                let outcome = r.u64()? as usize;
                Snapshot::Global { unitary, outcome }
            }
            2 => {
                let n_a = r.u8()? as usize;
                let subset: Vec<usize> = r.take(n_a)?.iter().map(|&s| s as usize).collect();
                let unitaries = (0..n_a).map(|_| r.unitary()).collect::<Result<Vec<_>>>()?;
                let outcome = unpack_bits(r.u64()?, n_a);
                let probability = r.f64()?;
                let n_b = r.u8()? as usize;
                if n_a + n_b != l {
                    return Err(Error::LogFormat("hybrid record size mismatch".into()));
                }
                let amps = (0..1usize << n_b).map(|_| r.complex()).collect::<Result<Vec<_>>>()?;
                let collapsed = PureState::new(n_b, amps).map_err(|e| Error::LogFormat(e.to_string()))?;
                Snapshot::Hybrid {
                    unitaries,
                    record: MeasurementRecord {
                        subset,
                        outcome,
                        collapsed,
                        probability,
                    },
                }
            }
            t => return Err(Error::LogFormat(format!("record tag {t}"))),
        };
        snapshots.push(snapshot);
    }
    if r.pos != bytes.len() {
        return Err(Error::LogFormat("trailing bytes".into()));
    }
    Ok(ShadowSet {
        protocol,
        num_qubits: l,
        master_seed,
        snapshots,
    })
}
