#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use ssd_core::canonical::to_canonical_json;
use ssd_core::chain::{Allocation, Genesis, Role};
use ssd_core::crypto::{hash256, keygen, KeyPair};
use ssd_core::stamps::default_stamps;
use ssd_core::TokenAmount;
use ssd_node::keyfile::{save, KeyFile};
use ssd_node::{spawn, NodeConfig, RunningNode};

pub struct Actors {
    pub authority: KeyPair,
    pub bank: KeyPair,
    pub alice: KeyPair,
    pub bob: KeyPair,
    pub validator: KeyPair,
}

pub fn actor(name: &str) -> KeyPair {
    keygen(Some(hash256(format!("actor:{name}").as_bytes()).0)).unwrap()
}

pub fn actors() -> Actors {
    Actors {
        authority: actor("authority"),
        bank: actor("bank"),
        alice: actor("alice"),
        bob: actor("bob"),
        validator: actor("validator"),
    }
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub actors: Actors,
    pub genesis: Genesis,
}

impl Fixture {
    pub fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let actors = actors();
        let mut roles = std::collections::BTreeMap::new();
        roles.insert(actors.bank.address(), Role::Bank);
        roles.insert(actors.alice.address(), Role::User);
        roles.insert(actors.bob.address(), Role::User);
        roles.insert(actors.validator.address(), Role::Validator);
        let genesis = Genesis {
            chain_id: "ssd-test".into(),
            genesis_time: 1_700_000_000,
            owner: actors.authority.address(),
            validators: vec![actors.validator.address()],
            allocations: vec![Allocation {
                address: actors.bank.address(),
                amount: TokenAmount(10_000),
            }],
            stamps: default_stamps(),
            fee: Default::default(),
            roles,
        };
        std::fs::write(dir.path().join("genesis.json"), to_canonical_json(&genesis)).unwrap();
        for (name, key) in [
            ("authority", &actors.authority),
            ("bank", &actors.bank),
            ("alice", &actors.alice),
            ("bob", &actors.bob),
            ("validator", &actors.validator),
        ] {
            save(&dir.path().join(format!("{name}.key")), &KeyFile::from_key(key, None)).unwrap();
        }
        Fixture { dir, actors, genesis }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self, validator: bool) -> NodeConfig {
        let mut cfg = NodeConfig::new(self.path("data"), self.path("genesis.json"));
        cfg.listen = "127.0.0.1:0".parse().unwrap();
        cfg.block_interval = Duration::from_millis(50);
        if validator {
            cfg.key_file = Some(self.path("validator.key"));
        }
        cfg
    }

    pub fn start(&self, validator: bool) -> RunningNode {
        spawn(self.config(validator)).unwrap()
    }

    pub fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, content).unwrap();
        p
    }
}

pub fn http() -> reqwest::blocking::Client {
    reqwest::blocking::Client::new()
}

pub fn get(node: &RunningNode, path: &str) -> (u16, String) {
    let r = http().get(format!("{}{path}", node.url())).send().unwrap();
    (r.status().as_u16(), r.text().unwrap())
}

pub fn post(node: &RunningNode, path: &str, body: &str) -> (u16, String) {
    let r = http()
        .post(format!("{}{path}", node.url()))
        .body(body.to_string())
        .send()
        .unwrap();
    (r.status().as_u16(), r.text().unwrap())
}

pub fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

/// Waits until the node's mempool is empty.
pub fn settle(node: &RunningNode) {
    for _ in 0..200 {
        if node.service.snapshot().mempool.is_empty() {
            return;
        }
        std::thread::sleep(Duration::from_millis(20));
    }
    panic!("mempool never drained");
}

