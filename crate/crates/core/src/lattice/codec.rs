//! Configuration file formats.
//!
//! Binary layout (all integers little-endian):
//!
//! | offset | size | field                                                   |
//! |--------|------|---------------------------------------------------------|
//! | 0      | 4    | magic `RSWC`                                            |
//! | 4      | 1    | format version, currently `1`                           |
//! | 5      | 1    | domain tag: `0` rectangle, `1` torus                    |
//! | 6      | 2    | reserved, zero                                          |
//! | 8      | 16   | rectangle: `cx, cy, hx, hy` as `i32`; torus: `side` as `u32` then 12 zero bytes |
//! | 24     | 8    | edge count `E` as `u64`                                 |
//! | 32     | 8·⌈E/64⌉ | bit words as `u64`; bit `k` of word `w` is edge `64w + k` |
//!
//! Padding bits past `E` are zero. The JSON form carries the same domain
//! descriptor and the bits as a string of `'0'`/`'1'` characters, character
//! `k` being edge `k`.

use serde::{Deserialize, Serialize};

use super::{Config, Domain, Rect};
use crate::error::{Error, Result};

pub const CONFIG_MAGIC: &[u8; 4] = b"RSWC";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 32;

pub fn encode_config(c: &Config) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * c.words().len());
    out.extend_from_slice(CONFIG_MAGIC);
    out.push(VERSION);
    match c.domain() {
        Domain::Rect(r) => {
            out.push(0);
            out.extend_from_slice(&[0, 0]);
            for v in [r.cx, r.cy, r.hx, r.hy] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Domain::Torus { side } => {
            out.push(1);
            out.extend_from_slice(&[0, 0]);
            out.extend_from_slice(&side.to_le_bytes());
            out.extend_from_slice(&[0; 12]);
        }
    }
    out.extend_from_slice(&(c.edge_count() as u64).to_le_bytes());
    for w in c.words() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

pub fn decode_config(bytes: &[u8]) -> Result<Config> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != CONFIG_MAGIC {
        return Err(Error::Format("missing RSWC header".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let domain = match bytes[5] {
        0 => {
            let f = |k: usize| read_u32(bytes, 8 + 4 * k) as i32;
            let (hx, hy) = (f(2), f(3));
            if hx < 0 || hy < 0 {
                return Err(Error::Format("negative half-width".into()));
            }
            Domain::Rect(Rect::new(f(0), f(1), hx, hy))
        }
        1 => Domain::torus(read_u32(bytes, 8))?,
        t => return Err(Error::Format(format!("unknown domain tag {t}"))),
    };
    let edges = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
    if edges != domain.edge_count() {
        return Err(Error::Format(format!("edge count {edges} does not match domain")));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * edges.div_ceil(64) {
        return Err(Error::Format("truncated or oversized bit payload".into()));
    }
    let words = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    Config::from_words(domain, words)
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    format: String,
    version: u8,
    domain: Domain,
    edges: usize,
    bits: String,
}

pub fn config_to_json(c: &Config) -> String {
    let bits = (0..c.edge_count()).map(|i| if c.get_index(i) { '1' } else { '0' }).collect();
    let doc = ConfigJson {
        format: "rswlab-config".into(),
        version: VERSION,
        domain: *c.domain(),
        edges: c.edge_count(),
        bits,
    };
    serde_json::to_string(&doc).expect("config serializes")
}

pub fn config_from_json(s: &str) -> Result<Config> {
    let doc: ConfigJson = serde_json::from_str(s)?;
    if doc.format != "rswlab-config" || doc.version != VERSION {
        return Err(Error::Format("not an rswlab-config v1 document".into()));
    }
    if doc.edges != doc.domain.edge_count() || doc.bits.len() != doc.edges {
        return Err(Error::Format("edge count does not match domain".into()));
    }
    let mut c = Config::all_closed(doc.domain);
    for (i, ch) in doc.bits.chars().enumerate() {
        match ch {
            '1' => c.set_index(i, true),
            '0' => {}
            other => return Err(Error::Format(format!("bad bit character {other:?}"))),
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_header_is_bit_exact() {
        let mut c = Config::all_closed(Domain::Rect(Rect::centered(1, 1)));
        c.set_index(0, true);
        c.set_index(11, true);
        let b = encode_config(&c);
        let mut expected = b"RSWC\x01\x00\x00\x00".to_vec();
        expected.extend_from_slice(&[0; 8]); // cx, cy
        expected.extend_from_slice(&[1, 0, 0, 0, 1, 0, 0, 0]); // hx, hy
        expected.extend_from_slice(&[12, 0, 0, 0, 0, 0, 0, 0]);
        expected.extend_from_slice(&[0x01, 0x08, 0, 0, 0, 0, 0, 0]);
        assert_eq!(b, expected);
    }

    #[test]
    fn rejects_corrupt_input() {
        let c = Config::all_open(Domain::torus(4).unwrap());
        let mut b = encode_config(&c);
        assert!(decode_config(&b[..20]).is_err());
        b[5] = 9;
        assert!(decode_config(&b).is_err());
        assert!(config_from_json("{}").is_err());
    }

    proptest! {
        #[test]
        fn round_trips(hx in 0i32..6, hy in 0i32..6, seed in any::<u64>(), torus in any::<bool>()) {
            let domain = if torus { Domain::torus(2 * (hx as u32 + 2)).unwrap() } else { Domain::Rect(Rect::new(hy - 2, 1, hx, hy)) };
            let mut s = seed;
            let c = Config::from_fn(domain, |_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s >> 63 == 1 });
            prop_assert_eq!(decode_config(&encode_config(&c)).unwrap(), c.clone());
            prop_assert_eq!(config_from_json(&config_to_json(&c)).unwrap(), c);
        }
    }
}
