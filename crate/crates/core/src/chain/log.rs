//! Append-only block log: one canonical-JSON block per line, genesis first.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::canonical::{from_canonical_json, to_canonical_json, CanonicalError};

use super::block::Block;
use super::genesis::Genesis;
use super::node::Node;
use super::{BlockRejection, ChainError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("block {height}: {reason}")]
pub struct ReplayError {
    pub height: u64,
    pub reason: BlockRejection,
}

pub fn parse_block_line(line: &str) -> Result<Block, BlockRejection> {
    from_canonical_json(line).map_err(|e| match e {
        CanonicalError::Malformed(m) => BlockRejection::Malformed(m),
        CanonicalError::NotCanonical => BlockRejection::NotCanonical,
    })
}

/// Replays a log given as text lines. Line 0 must be the genesis block
/// derived from `genesis`; an empty log yields the genesis state.
pub fn replay_lines<'a, I>(genesis: &Genesis, lines: I) -> Result<Node, ReplayError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut node = Node::new(genesis.clone(), None).map_err(|e| ReplayError {
        height: 0,
        reason: BlockRejection::Malformed(e.to_string()),
    })?;
    for (i, line) in lines.into_iter().enumerate() {
        let height = i as u64;
        let block = parse_block_line(line).map_err(|reason| ReplayError { height, reason })?;
        if i == 0 {
            if block != node.blocks()[0] {
                return Err(ReplayError {
                    height,
                    reason: BlockRejection::BadLinkage("genesis block does not match genesis file".into()),
                });
            }
            continue;
        }
        node.validate_and_append(block)
            .map_err(|reason| ReplayError { height, reason })?;
    }
    Ok(node)
}

/// Replays raw log bytes. Lines that are not UTF-8 fail as malformed at
/// their height; a trailing newline is allowed.
pub fn replay_bytes(genesis: &Genesis, bytes: &[u8]) -> Result<Node, ReplayError> {
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    let mut lines = Vec::new();
    if !body.is_empty() {
        for (i, raw) in body.split(|b| *b == b'\n').enumerate() {
            let line = std::str::from_utf8(raw).map_err(|e| ReplayError {
                height: i as u64,
                reason: BlockRejection::Malformed(e.to_string()),
            })?;
            lines.push(line);
        }
    }
    replay_lines(genesis, lines)
}

pub fn replay(genesis: &Genesis, blocks: &[Block]) -> Result<Node, ReplayError> {
    let lines: Vec<String> = blocks.iter().map(to_canonical_json).collect();
    replay_lines(genesis, lines.iter().map(String::as_str))
}

pub struct BlockLog {
    path: PathBuf,
    file: File,
}

impl BlockLog {
    pub fn open(path: impl AsRef<Path>) -> Result<BlockLog, ChainError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(BlockLog { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, block: &Block) -> Result<(), ChainError> {
        let mut line = to_canonical_json(block);
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    /// Raw log contents; a missing file reads as empty.
    pub fn read_bytes(path: impl AsRef<Path>) -> Result<Vec<u8>, ChainError> {
        match std::fs::read(path) {
            Ok(b) => Ok(b),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes a complete log in one go (genesis included).
    pub fn write_all(path: impl AsRef<Path>, blocks: &[Block]) -> Result<(), ChainError> {
        let mut out = String::new();
        for b in blocks {
            out.push_str(&to_canonical_json(b));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}
