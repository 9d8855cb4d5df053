//! In-process multi-validator harness.
//!
//! A scenario script names actors and lists transaction submissions by
//! round. Each round, the round's submissions are broadcast to every node's
//! mempool, the scheduled validator proposes, and every node (proposer
//! included) validates the block on its own thread. Nodes share nothing:
//! transactions and blocks are passed by value.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{
    Allocation, Block, BlockRejection, FeePolicy, Genesis, Node, Role, SignedTransaction,
    TransactionPayload, TxStatus,
};
use crate::content::{build_filter, extract_words, BloomFilterParams};
use crate::crypto::{hash256, keygen, Address, Digest32, KeyPair};
use crate::stamps::{default_stamps, StampParam, StampUpdate};
use crate::token::TokenAmount;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("need at least one validator")]
    NoValidators,
    #[error("script names unknown actor {0:?}")]
    UnknownActor(String),
    #[error("script must declare exactly one authority actor")]
    Authority,
    #[error("invalid actor seed for {0:?}")]
    BadSeed(String),
    #[error("genesis: {0}")]
    Genesis(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub name: String,
    pub role: Role,
    /// 32-byte hex seed; derived from the name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptAllocation {
    pub to: String,
    pub amount: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptOp {
    Mint {
        to: String,
        amount: u64,
    },
    Transfer {
        to: String,
        amount: u64,
    },
    Burn {
        amount: u64,
    },
    AddStamp {
        code: String,
        name: String,
        price: u64,
        reference: String,
    },
    UpdateStamp {
        code: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        price: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        active: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<String>,
    },
    /// Pays duty on a document given as text. The payment timestamp is the
    /// round's block time plus `time_offset`.
    Pay {
        document: String,
        stamp: String,
        #[serde(default)]
        time_offset: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub round: u64,
    pub from: String,
    pub op: ScriptOp,
    /// Overrides the automatically tracked nonce.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<u64>,
    /// Flip a bit of the transaction signature before broadcast.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub corrupt_signature: bool,
}

fn default_start() -> u64 {
    1_700_000_000
}

fn default_interval() -> u64 {
    10
}

fn default_chain_id() -> String {
    "ssd-sim".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioScript {
    #[serde(default = "default_chain_id")]
    pub chain_id: String,
    #[serde(default = "default_start")]
    pub start_time: u64,
    #[serde(default = "default_interval")]
    pub block_interval: u64,
    /// Minimum number of rounds; the last submission round extends it.
    #[serde(default)]
    pub rounds: u64,
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub allocations: Vec<ScriptAllocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fee: Option<u64>,
    #[serde(default)]
    pub submissions: Vec<Submission>,
}

pub fn validator_key(index: usize) -> KeyPair {
    let seed = hash256(format!("validator:{index}").as_bytes());
    keygen(Some(seed.0)).expect("hash output is a valid seed")
}

impl ScenarioScript {
    pub fn actor_key(&self, name: &str) -> Result<KeyPair, SimError> {
        let actor = self
            .actors
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| SimError::UnknownActor(name.into()))?;
        let seed = match &actor.seed {
            Some(hex) => {
                let bytes = crate::crypto::decode_hex_exact(hex, 32)
                    .map_err(|_| SimError::BadSeed(name.into()))?;
                let mut s = [0u8; 32];
                s.copy_from_slice(&bytes);
                s
            }
            None => hash256(format!("actor:{name}").as_bytes()).0,
        };
        keygen(Some(seed)).map_err(|_| SimError::BadSeed(name.into()))
    }

    pub fn actor_address(&self, name: &str) -> Result<Address, SimError> {
        self.actor_key(name).map(|k| k.address())
    }

    pub fn block_time(&self, round: u64) -> u64 {
        self.start_time + round * self.block_interval
    }

    pub fn genesis(&self, n_validators: usize) -> Result<Genesis, SimError> {
        if n_validators == 0 {
            return Err(SimError::NoValidators);
        }
        let authorities: Vec<&Actor> = self
            .actors
            .iter()
            .filter(|a| a.role == Role::Authority)
            .collect();
        if authorities.len() != 1 {
            return Err(SimError::Authority);
        }
        let owner = self.actor_address(&authorities[0].name)?;
        let validators: Vec<Address> = (0..n_validators).map(|i| validator_key(i).address()).collect();
        let mut roles = BTreeMap::new();
        for v in &validators {
            roles.insert(*v, Role::Validator);
        }
        for a in &self.actors {
            if a.role != Role::Authority {
                roles.insert(self.actor_address(&a.name)?, a.role);
            }
        }
        let allocations = self
            .allocations
            .iter()
            .map(|a| {
                Ok(Allocation {
                    address: self.actor_address(&a.to)?,
                    amount: TokenAmount(a.amount),
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        let genesis = Genesis {
            chain_id: self.chain_id.clone(),
            genesis_time: self.start_time,
            owner,
            validators,
            allocations,
            stamps: default_stamps(),
            fee: match self.fee {
                Some(amount) => FeePolicy {
                    enabled: true,
                    amount: TokenAmount(amount),
                },
                None => FeePolicy::default(),
            },
            roles,
        };
        genesis
            .validate()
            .map_err(|e| SimError::Genesis(e.to_string()))?;
        Ok(genesis)
    }

    fn payload(&self, op: &ScriptOp, key: &KeyPair, block_time: u64) -> Result<TransactionPayload, SimError> {
        Ok(match op {
            ScriptOp::Mint { to, amount } => TransactionPayload::Mint {
                to: self.actor_address(to)?,
                amount: TokenAmount(*amount),
            },
            ScriptOp::Transfer { to, amount } => TransactionPayload::Transfer {
                to: self.actor_address(to)?,
                amount: TokenAmount(*amount),
            },
            ScriptOp::Burn { amount } => TransactionPayload::Burn {
                amount: TokenAmount(*amount),
            },
            ScriptOp::AddStamp {
                code,
                name,
                price,
                reference,
            } => TransactionPayload::AddStamp {
                stamp: StampParam::new(code, name, *price, reference),
            },
            ScriptOp::UpdateStamp {
                code,
                price,
                active,
                reference,
            } => TransactionPayload::UpdateStamp {
                stamp_code: code.clone(),
                update: StampUpdate {
                    price: price.map(TokenAmount),
                    active: *active,
                    reference: reference.clone(),
                },
            },
            ScriptOp::Pay {
                document,
                stamp,
                time_offset,
            } => {
                let doc_hash = hash256(document.as_bytes());
                TransactionPayload::PayStampDuty {
                    doc_hash,
                    stamp_code: stamp.clone(),
                    bloom_filter: build_filter(&extract_words(document), BloomFilterParams::DEFAULT),
                    time_stamp: block_time.saturating_add_signed(*time_offset),
                    payer_signature: key.sign(&doc_hash),
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxRejection {
    pub height: u64,
    pub tx_hash: Digest32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeBlockRejection {
    pub node: usize,
    pub height: u64,
    pub reason: BlockRejection,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub genesis: Genesis,
    /// `roots[node][height]`, genesis at index 0.
    pub roots: Vec<Vec<Digest32>>,
    pub block_rejections: Vec<NodeBlockRejection>,
    pub nodes: Vec<Node>,
}

impl SimReport {
    pub fn final_roots(&self) -> Vec<Digest32> {
        self.nodes.iter().map(|n| n.state().state_root()).collect()
    }

    /// Every node holds the same root at every height.
    pub fn all_agree(&self) -> bool {
        let first = &self.roots[0];
        self.block_rejections.is_empty() && self.roots.iter().all(|r| r == first)
    }

    pub fn blocks(&self) -> &[Block] {
        self.nodes[0].blocks()
    }

    /// Transactions each node recorded as rejected, from its own chain.
    pub fn tx_rejections(&self, node: usize) -> Vec<TxRejection> {
        self.nodes[node]
            .blocks()
            .iter()
            .flat_map(|b| {
                b.receipts
                    .iter()
                    .filter(|r| r.status == TxStatus::Rejected)
                    .map(move |r| TxRejection {
                        height: b.height,
                        tx_hash: r.tx_hash,
                        reason: r.reason.clone().unwrap_or_default(),
                    })
            })
            .collect()
    }

    pub fn applied_count(&self) -> usize {
        self.blocks().iter().map(|b| b.applied().count()).sum()
    }
}

/// Runs `script` on `n_validators` nodes in lock-step rounds.
pub fn run_simulation(n_validators: usize, script: &ScenarioScript) -> Result<SimReport, SimError> {
    let genesis = script.genesis(n_validators)?;
    let mut nodes: Vec<Node> = (0..n_validators)
        .map(|i| Node::new(genesis.clone(), Some(validator_key(i))))
        .collect::<Result<_, _>>()
        .map_err(|e| SimError::Genesis(e.to_string()))?;

    let mut by_round: BTreeMap<u64, Vec<&Submission>> = BTreeMap::new();
    for s in &script.submissions {
        by_round.entry(s.round).or_default().push(s);
    }
    let last_round = by_round.keys().next_back().copied().unwrap_or(0);
    let rounds = script.rounds.max(last_round);

    let mut keys: HashMap<String, KeyPair> = HashMap::new();
    for a in &script.actors {
        keys.insert(a.name.clone(), script.actor_key(&a.name)?);
    }

    let mut roots: Vec<Vec<Digest32>> = nodes.iter().map(|n| vec![n.state().state_root()]).collect();
    let mut block_rejections = Vec::new();

    for round in 1..=rounds {
        let block_time = script.block_time(round);
        let mut pending: HashMap<Address, u64> = HashMap::new();
        for sub in by_round.get(&round).into_iter().flatten() {
            let key = keys
                .get(&sub.from)
                .ok_or_else(|| SimError::UnknownActor(sub.from.clone()))?;
            let sender = key.address();
            let queued = pending.entry(sender).or_insert(0);
            let nonce = sub
                .nonce
                .unwrap_or_else(|| nodes[0].state().nonce_of(&sender) + *queued);
            if sub.nonce.is_none() && !sub.corrupt_signature {
                *queued += 1;
            }
            let payload = script.payload(&sub.op, key, block_time)?;
            let mut tx = SignedTransaction::sign(key, nonce, payload);
            if sub.corrupt_signature {
                tx.tx_signature.s[31] ^= 1;
            }
            for n in nodes.iter_mut() {
                n.submit(tx.clone());
            }
        }

        let proposer = (round % n_validators as u64) as usize;
        let block = nodes[proposer]
            .propose_block(block_time)
            .expect("round-robin schedule matches the harness rotation");

        let outcomes: Vec<Result<(), BlockRejection>> = std::thread::scope(|scope| {
            let handles: Vec<_> = nodes
                .iter_mut()
                .map(|n| {
                    let b = block.clone();
                    scope.spawn(move || n.validate_and_append(b))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("validator thread")).collect()
        });
        for (i, outcome) in outcomes.into_iter().enumerate() {
            if let Err(reason) = outcome {
                block_rejections.push(NodeBlockRejection {
                    node: i,
                    height: block.height,
                    reason,
                });
            }
            roots[i].push(nodes[i].state().state_root());
        }
    }

    Ok(SimReport {
        genesis,
        roots,
        block_rejections,
        nodes,
    })
}

/// The end-to-end walkthrough: the authority allocates 10000 tokens to a
/// bank, the bank sells 6000 to Alice, Alice pays the Rp6000 stamp on a
/// contract, and after the audit the authority burns the 6000 it collected.
pub fn walkthrough_script() -> ScenarioScript {
    let actor = |name: &str, role| Actor {
        name: name.into(),
        role,
        seed: None,
    };
    let sub = |round, from: &str, op| Submission {
        round,
        from: from.into(),
        op,
        nonce: None,
        corrupt_signature: false,
    };
    ScenarioScript {
        chain_id: "ssd-walkthrough".into(),
        start_time: default_start(),
        block_interval: default_interval(),
        rounds: 3,
        actors: vec![
            actor("authority", Role::Authority),
            actor("bank", Role::Bank),
            actor("alice", Role::User),
            actor("bob", Role::User),
        ],
        allocations: vec![ScriptAllocation {
            to: "bank".into(),
            amount: 10_000,
        }],
        fee: None,
        submissions: vec![
            sub(
                1,
                "bank",
                ScriptOp::Transfer {
                    to: "alice".into(),
                    amount: 6000,
                },
            ),
            sub(
                2,
                "alice",
                ScriptOp::Pay {
                    document: WALKTHROUGH_DOCUMENT.into(),
                    stamp: "M6000".into(),
                    time_offset: 0,
                },
            ),
            sub(3, "authority", ScriptOp::Burn { amount: 6000 }),
        ],
    }
}

/// Parameters for [`random_script`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomScriptParams {
    pub seed: u64,
    pub rounds: u64,
    pub txs_per_round: usize,
    pub users: usize,
    /// Probability that a submission is deliberately invalid.
    pub invalid_ratio: f64,
}

impl Default for RandomScriptParams {
    fn default() -> Self {
        RandomScriptParams {
            seed: 1,
            rounds: 100,
            txs_per_round: 6,
            users: 6,
            invalid_ratio: 0.15,
        }
    }
}

const VOCAB: &[&str] = &[
    "perjanjian", "sewa", "rumah", "pihak", "pertama", "kedua", "harga", "bulan", "tahun",
    "dibayar", "muka", "notaris", "akta", "jual", "beli", "tanah", "kuasa", "surat", "kontrak",
    "pinjaman", "bunga", "jaminan", "saksi", "tanggal", "alamat", "jakarta", "bandung", "meterai",
];

fn random_document(rng: &mut impl rand::Rng, salt: u64) -> String {
    let n = rng.gen_range(8..40);
    let mut words: Vec<&str> = (0..n).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect();
    words.push("nomor");
    format!("{} {salt}\n", words.join(" "))
}

/// A reproducible mixed workload: bank sales, user transfers, payments,
/// stamp updates and burns, with a share of submissions that must be
/// rejected (forged mints, stale nonces, overspends, bad signatures,
/// unknown stamps, stale payment timestamps).
pub fn random_script(p: RandomScriptParams) -> ScenarioScript {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(p.seed);
    let users: Vec<String> = (0..p.users.max(2)).map(|i| format!("user{i}")).collect();
    let banks = ["bank0".to_string(), "bank1".to_string()];
    let mut actors = vec![Actor {
        name: "authority".into(),
        role: Role::Authority,
        seed: None,
    }];
    for b in &banks {
        actors.push(Actor { name: b.clone(), role: Role::Bank, seed: None });
    }
    for u in &users {
        actors.push(Actor { name: u.clone(), role: Role::User, seed: None });
    }
    let allocations = banks
        .iter()
        .map(|b| ScriptAllocation { to: b.clone(), amount: 1_000_000 })
        .collect();

    let mut submissions = Vec::new();
    let mut doc_salt = 0u64;
    let pick = |rng: &mut rand::rngs::StdRng, v: &[String]| v[rng.gen_range(0..v.len())].clone();
    for round in 1..=p.rounds {
        for _ in 0..p.txs_per_round {
            let mut sub = Submission {
                round,
                from: String::new(),
                op: ScriptOp::Burn { amount: 0 },
                nonce: None,
                corrupt_signature: false,
            };
            if rng.gen_bool(p.invalid_ratio) {
                match rng.gen_range(0..6) {
                    0 => {
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Mint { to: sub.from.clone(), amount: 1000 };
                    }
                    1 => {
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Transfer { to: pick(&mut rng, &users), amount: 1 };
                        sub.corrupt_signature = true;
                    }
                    2 => {
                        sub.from = pick(&mut rng, &banks);
                        sub.op = ScriptOp::Transfer { to: pick(&mut rng, &users), amount: 1 };
                        sub.nonce = Some(u64::MAX);
                    }
                    3 => {
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Transfer { to: pick(&mut rng, &users), amount: 10_000_000 };
                    }
                    4 => {
                        doc_salt += 1;
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Pay {
                            document: random_document(&mut rng, doc_salt),
                            stamp: "M9999".into(),
                            time_offset: 0,
                        };
                    }
                    _ => {
                        doc_salt += 1;
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Pay {
                            document: random_document(&mut rng, doc_salt),
                            stamp: "M3000".into(),
                            time_offset: 10_000,
                        };
                    }
                }
            } else {
                match rng.gen_range(0..10) {
                    0..=3 => {
                        sub.from = pick(&mut rng, &banks);
                        sub.op = ScriptOp::Transfer {
                            to: pick(&mut rng, &users),
                            amount: rng.gen_range(3000..20_000),
                        };
                    }
                    4 | 5 => {
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Transfer {
                            to: pick(&mut rng, &users),
                            amount: rng.gen_range(1..500),
                        };
                    }
                    6 | 7 => {
                        doc_salt += 1;
                        sub.from = pick(&mut rng, &users);
                        sub.op = ScriptOp::Pay {
                            document: random_document(&mut rng, doc_salt),
                            stamp: if rng.gen_bool(0.5) { "M3000" } else { "M6000" }.into(),
                            time_offset: rng.gen_range(-60..60),
                        };
                    }
                    8 => {
                        sub.from = "authority".into();
                        sub.op = ScriptOp::Burn { amount: rng.gen_range(1..3000) };
                    }
                    _ => {
                        sub.from = "authority".into();
                        sub.op = ScriptOp::Mint {
                            to: pick(&mut rng, &banks),
                            amount: rng.gen_range(1000..50_000),
                        };
                    }
                }
            }
            submissions.push(sub);
        }
    }
    ScenarioScript {
        chain_id: format!("ssd-random-{}", p.seed),
        start_time: default_start(),
        block_interval: default_interval(),
        rounds: p.rounds,
        actors,
        allocations,
        fee: None,
        submissions,
    }
}

pub const WALKTHROUGH_DOCUMENT: &str = "SURAT PERJANJIAN SEWA RUMAH\n\
Pada hari ini telah disepakati perjanjian sewa rumah antara Pihak Pertama \
dan Pihak Kedua untuk jangka waktu dua belas bulan dengan harga sewa \
Rp24.000.000 yang dibayar di muka.\n";
