#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cmsbwt_core::Collection;

const LETTERS: &[u8] = b"ACGTNR";

#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub reference: Vec<u8>,
    pub docs: Vec<Vec<u8>>,
}

impl Instance {
    pub fn collection(&self) -> Collection {
        Collection::from_bodies(self.docs.iter().map(|d| d.as_slice())).expect("valid collection")
    }
}

pub fn random_text(rng: &mut StdRng, len: usize, alphabet: &[u8]) -> Vec<u8> {
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// A copy of `base` with substitutions, insertions and deletions at `rate`.
pub fn mutate(rng: &mut StdRng, base: &[u8], rate: f64, alphabet: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(base.len() + 8);
    for &b in base {
        if rate > 0.0 && rng.gen_bool(rate) {
            match rng.gen_range(0..3) {
                0 => out.push(alphabet[rng.gen_range(0..alphabet.len())]),
                1 => {
                    out.push(b);
                    out.push(alphabet[rng.gen_range(0..alphabet.len())]);
                }
                _ => {}
            }
        } else {
            out.push(b);
        }
    }
    if out.is_empty() {
        out.push(alphabet[0]);
    }
    out
}

pub fn random_instance(rng: &mut StdRng, index: usize) -> Instance {
    let sigma = rng.gen_range(2..=6);
    let alphabet = &LETTERS[..sigma];
    let ref_len = rng.gen_range(20..=500);
    let docs = rng.gen_range(1..=8);
    let rate = [0.0, 0.001, 0.01, 0.05, 0.1, 0.2][rng.gen_range(0..6)];
    let reference = random_text(rng, ref_len, alphabet);
    let docs = (0..docs)
        .map(|_| mutate(rng, &reference, rate, alphabet))
        .collect();
    Instance {
        label: format!("random #{index} (sigma {sigma}, |R| {ref_len}, rate {rate})"),
        reference,
        docs,
    }
}

/// Hand-picked inputs that stress boundaries.
pub fn adversarial_instances(rng: &mut StdRng) -> Vec<Instance> {
    let r = random_text(rng, 60, b"ACGT");
    let mut out = vec![
        Instance {
            label: "symbol absent from reference".into(),
            reference: b"ACACACGTGT".to_vec(),
            docs: vec![b"ACAZZCGTGT".to_vec(), b"ZZZZ".to_vec(), b"AAZ".to_vec()],
        },
        Instance {
            label: "document identical to reference".into(),
            reference: r.clone(),
            docs: vec![r.clone(), r.clone(), r.clone()],
        },
        Instance {
            label: "single-symbol documents".into(),
            reference: r.clone(),
            docs: vec![b"A".to_vec(), b"C".to_vec(), b"A".to_vec(), b"T".to_vec()],
        },
        Instance {
            label: "homopolymer reference and documents".into(),
            reference: vec![b'A'; 50],
            docs: vec![
                vec![b'A'; 50],
                vec![b'A'; 49],
                vec![b'A'; 51],
                b"AAAAC".to_vec(),
            ],
        },
        Instance {
            label: "periodic text".into(),
            reference: b"ACG".repeat(30),
            docs: vec![b"ACG".repeat(31), b"CGA".repeat(10), b"GACGACGAC".to_vec()],
        },
        Instance {
            label: "prefixes and suffixes of the reference".into(),
            reference: r.clone(),
            docs: vec![
                r[..30].to_vec(),
                r[30..].to_vec(),
                r[1..].to_vec(),
                r[..59].to_vec(),
            ],
        },
        Instance {
            label: "unrelated documents".into(),
            reference: r.clone(),
            docs: (0..4).map(|_| random_text(rng, 40, b"ACGT")).collect(),
        },
        Instance {
            label: "two-suffix case".into(),
            reference: b"A".to_vec(),
            docs: vec![b"A".to_vec()],
        },
        Instance {
            label: "two-document example".into(),
            reference: b"CATTAGATTAG".to_vec(),
            docs: vec![b"TAGAGATTATT".to_vec(), b"GATTACATTAG".to_vec()],
        },
        Instance {
            label: "documents ending inside repeats".into(),
            reference: b"CATTAGATTAG".to_vec(),
            docs: vec![
                b"CATTAG".to_vec(),
                b"GATTAG".to_vec(),
                b"ATTAG".to_vec(),
                b"TTAG".to_vec(),
            ],
        },
    ];
    for k in 0..10 {
        let base = random_text(rng, 30, b"AC");
        out.push(Instance {
            label: format!("binary repeats #{k}"),
            reference: base.repeat(3),
            docs: (0..5)
                .map(|_| mutate(rng, &base.repeat(2), 0.05, b"AC"))
                .collect(),
        });
    }
    out
}

/// `count` random instances followed by the adversarial set.
pub fn suite(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out: Vec<Instance> = (0..count).map(|i| random_instance(&mut rng, i)).collect();
    out.extend(adversarial_instances(&mut rng));
    out
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
