use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use vaultchain_core::chain::workload::{Workload, WorkloadConfig};
use vaultchain_core::chain::{self, Chain, GenesisConfig};
use vaultchain_core::security::{self, AttackParams, ExactDecimal};
use vaultchain_core::{
    AccountKind, Address, KeyPair, Payload, SignatureScheme, Transaction, TransferStatus, TxId,
};

use crate::args::{
    BlockCmd, Command, GlobalOpts, InitArgs, KeysCmd, QueryCmd, SimCmd, TxCmd, TxOpts, WorkloadArgs,
};
use crate::error::CliError;
use crate::home::{ChainHome, HomeLock};
use crate::keystore::{KeyFile, Protection};

/// What a command produced, in both output styles.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub human: String,
    pub json: Value,
    /// Set by transaction commands; scenarios expose it as `$last`.
    pub tx: Option<TxId>,
}

impl Outcome {
    fn new(human: impl Into<String>, json: Value) -> Self {
        Outcome {
            human: human.into(),
            json,
            tx: None,
        }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            serde_json::to_string(&self.json).expect("json value serializes")
        } else {
            self.human.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// No chain home involved.
    None,
    Read,
    Write,
}

impl Command {
    pub fn access(&self) -> Access {
        match self {
            Command::Sim(_) => Access::None,
            Command::Query(_) | Command::Replay | Command::Keys(KeysCmd::List) => Access::Read,
            _ => Access::Write,
        }
    }
}

/// A locked chain home plus the chain loaded from it, opened on first use.
pub struct Session {
    opts: GlobalOpts,
    home: ChainHome,
    access: Access,
    chain: Option<Chain>,
    key_seed: Option<u64>,
    _lock: Option<HomeLock>,
}

impl Session {
    pub fn open(opts: GlobalOpts, access: Access) -> Result<Self, CliError> {
        let home = ChainHome::new(&opts.home);
        let lock = match access {
            Access::None => None,
            Access::Read => Some(home.lock(false)?),
            Access::Write => Some(home.lock(true)?),
        };
        Ok(Session {
            opts,
            home,
            access,
            chain: None,
            key_seed: None,
            _lock: lock,
        })
    }

    /// Keys generated without `--seed` are derived from this instead of
    /// fresh randomness, so scripts replay identically.
    pub fn set_key_seed(&mut self, seed: u64) {
        self.key_seed = Some(seed);
    }

    pub fn home(&self) -> &ChainHome {
        &self.home
    }

    pub fn chain(&mut self) -> Result<&mut Chain, CliError> {
        if self.chain.is_none() {
            let chain = self.home.open_chain(self.access == Access::Write)?;
            self.chain = Some(chain);
        }
        Ok(self.chain.as_mut().expect("just opened"))
    }

    pub fn resolve_address(&self, text: &str) -> Result<Address, CliError> {
        if let Some(name) = text.strip_prefix('@') {
            let (name, kind) = match name.strip_suffix(".vault") {
                Some(n) => (n, AccountKind::Vault),
                None => (name, AccountKind::Standard),
            };
            return Ok(self.home.keystore().get(name)?.address(kind));
        }
        text.parse()
            .map_err(|e| CliError::usage(format!("bad address {text:?}: {e}")))
    }

    fn unlock(&self, file: &KeyFile) -> Result<KeyPair, CliError> {
        self.home
            .keystore()
            .unlock(file, self.opts.passphrase.as_deref())
    }

    fn signer_for(&self, addr: &Address) -> Result<KeyPair, CliError> {
        let file = self
            .home
            .keystore()
            .find_by_address(addr)?
            .ok_or_else(|| CliError::usage(format!("no local key controls {addr}")))?;
        self.unlock(&file)
    }

    pub fn execute(&mut self, cmd: Command) -> Result<Outcome, CliError> {
        match cmd {
            Command::Init(args) => self.init(args),
            Command::Keys(k) => self.keys(k),
            Command::Tx(t) => self.tx(t),
            Command::Block(BlockCmd::Produce { count }) => self.produce(count),
            Command::Query(q) => self.query(q),
            Command::Sim(s) => sim(s),
            Command::Replay => self.replay(),
            Command::Workload(w) => self.workload(w),
            Command::RunScenario(_) => Err(CliError::usage(
                "run-scenario is handled by the caller, not a session",
            )),
        }
    }

    fn init(&mut self, args: InitArgs) -> Result<Outcome, CliError> {
        let genesis = match args.genesis {
            Some(path) => GenesisConfig::load(&path)?,
            None => {
                let mut g = GenesisConfig::new(args.chain_id.expect("clap requires chain id"));
                if let Some(t) = args.theta_max {
                    g.theta_max = t;
                }
                if let Some(s) = args.scheme {
                    g.signature_scheme = s;
                }
                for spec in &args.alloc {
                    let (addr, amount) = spec.split_once('=').ok_or_else(|| {
                        CliError::usage(format!("--alloc expects ADDRESS=AMOUNT, got {spec:?}"))
                    })?;
                    let amount: u64 = amount
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad amount in {spec:?}")))?;
                    g = g.allocate(self.resolve_address(addr)?, amount);
                }
                g
            }
        };
        let chain = self.home.initialize(&genesis)?;
        let head = chain.head();
        let out = Outcome::new(
            format!(
                "initialized chain {} at {}\nstate digest {}",
                chain.chain_id(),
                self.home.root().display(),
                head.state_digest
            ),
            json!({
                "chain_id": chain.chain_id(),
                "height": head.height,
                "state_digest": head.state_digest,
                "hash": head.hash,
            }),
        );
        self.chain = Some(chain);
        Ok(out)
    }

    fn keys(&mut self, cmd: KeysCmd) -> Result<Outcome, CliError> {
        match cmd {
            KeysCmd::Gen { name, seed, scheme } => {
                let scheme = match (self.home.is_initialized(), scheme) {
                    (_, Some(s)) => s,
                    (true, None) => self.home.load_genesis()?.signature_scheme,
                    (false, None) => SignatureScheme::default(),
                };
                let pair = match (seed, self.key_seed) {
                    (Some(text), _) => {
                        let mut h = Sha256::new();
                        h.update(b"vaultchain-key-seed");
                        h.update(text.as_bytes());
                        KeyPair::from_seed(scheme, h.finalize().into())
                    }
                    (None, Some(s)) => {
                        let mut h = Sha256::new();
                        h.update(b"vaultchain-scenario-key");
                        h.update(s.to_be_bytes());
                        h.update(name.as_bytes());
                        KeyPair::from_seed(scheme, h.finalize().into())
                    }
                    (None, None) => KeyPair::generate(scheme, &mut rand::rng()),
                };
                let protection = match (&self.opts.passphrase, self.opts.insecure) {
                    (_, true) => Protection::Plaintext,
                    (Some(p), false) => Protection::Passphrase(p),
                    (None, false) => {
                        return Err(CliError::usage(
                            "a passphrase is required to store keys; pass --passphrase, \
                             set VAULTCHAIN_PASSPHRASE, or use --insecure",
                        ))
                    }
                };
                let file = self.home.keystore().create(&name, &pair, protection)?;
                Ok(Outcome::new(
                    format!(
                        "key {}\n  standard {}\n  vault    {}",
                        file.name, file.standard, file.vault
                    ),
                    key_json(&file),
                ))
            }
            KeysCmd::List => {
                let keys = self.home.keystore().list()?;
                let human = keys
                    .iter()
                    .map(|k| format!("{:<16} {} {}", k.name, k.standard, k.vault))
                    .collect::<Vec<_>>()
                    .join("\n");
                Ok(Outcome::new(
                    human,
                    Value::Array(keys.iter().map(key_json).collect()),
                ))
            }
        }
    }

    fn tx(&mut self, cmd: TxCmd) -> Result<Outcome, CliError> {
        let (from, payload, opts, signer) = match cmd {
            TxCmd::Pay {
                from,
                to,
                amount,
                opts,
            } => (
                self.resolve_address(&from)?,
                Payload::IrrevocablePay {
                    to: self.resolve_address(&to)?,
                    amount: amount.into(),
                },
                opts,
                None,
            ),
            TxCmd::VaultCreate {
                from,
                retrieval,
                amount,
                vault_key,
                opts,
            } => {
                let from = self.resolve_address(&from)?;
                let funder = self.signer_for(&from)?;
                let vault_pubkey = match vault_key {
                    Some(name) => self.home.keystore().get(&name)?.public,
                    None => *funder.public(),
                };
                (
                    from,
                    Payload::VaultCreate {
                        vault_pubkey,
                        retrieval: self.resolve_address(&retrieval)?,
                        amount: amount.into(),
                    },
                    opts,
                    Some(funder),
                )
            }
            TxCmd::RevocablePay {
                from,
                to,
                amount,
                delay,
                opts,
            } => (
                self.resolve_address(&from)?,
                Payload::RevocablePay {
                    to: self.resolve_address(&to)?,
                    amount: amount.into(),
                    delay,
                },
                opts,
                None,
            ),
            TxCmd::Revoke { from, target, opts } => (
                self.resolve_address(&from)?,
                Payload::Revoke {
                    target: target
                        .parse()
                        .map_err(|e| CliError::usage(format!("bad --target {target:?}: {e}")))?,
                },
                opts,
                None,
            ),
            TxCmd::VaultClear { from, close, opts } => (
                self.resolve_address(&from)?,
                Payload::VaultClear { close },
                opts,
                None,
            ),
            TxCmd::AccountSet {
                from,
                label,
                retrieval,
                opts,
            } => {
                let from = self.resolve_address(&from)?;
                let signer = self.signer_for(&from)?;
                let retrieval = retrieval.map(|r| self.resolve_address(&r)).transpose()?;
                (
                    from,
                    Payload::AccountSet {
                        pubkey: *signer.public(),
                        label,
                        retrieval,
                    },
                    opts,
                    Some(signer),
                )
            }
        };
        let signer = match signer {
            Some(s) => s,
            None => self.signer_for(&from)?,
        };
        self.submit(from, payload, &opts, &signer)
    }

    fn submit(
        &mut self,
        from: Address,
        payload: Payload,
        opts: &TxOpts,
        signer: &KeyPair,
    ) -> Result<Outcome, CliError> {
        let vault_created = match &payload {
            Payload::VaultCreate { vault_pubkey, .. } => {
                Some(Address::derive(vault_pubkey, AccountKind::Vault))
            }
            _ => None,
        };
        let chain = self.chain()?;
        let nonce = opts.nonce.unwrap_or_else(|| chain.next_nonce(&from));
        let tx = Transaction::unsigned(from, nonce, payload).sign(signer);
        if !opts.force {
            chain.dry_run(&tx)?;
        }
        let kind = tx.kind();
        let id = chain.submit(tx)?;
        self.home
            .save_mempool(self.chain.as_ref().expect("opened above"))?;
        let mut human = format!("queued {id}");
        let mut record =
            json!({ "id": id, "kind": kind.to_string(), "from": from, "nonce": nonce });
        if let Some(vault) = vault_created {
            human.push_str(&format!("\nvault {vault}"));
            record["vault"] = json!(vault);
        }
        Ok(Outcome {
            human,
            json: record,
            tx: Some(id),
        })
    }

    fn produce(&mut self, count: u64) -> Result<Outcome, CliError> {
        let mut human = Vec::new();
        let mut records = Vec::new();
        for _ in 0..count {
            let block = self.chain()?.produce_block()?.clone();
            let applied = block.applied().count();
            let rejected: Vec<_> = block.rejected().collect();
            human.push(format!(
                "block {} applied {} rejected {} matured {} digest {}",
                block.height,
                applied,
                rejected.len(),
                block.matured.len(),
                block.state_digest
            ));
            for e in &rejected {
                human.push(format!("  rejected {} {}", e.tx.id(), receipt_text(e)));
            }
            records.push(json!({
                "height": block.height,
                "hash": block.hash,
                "state_digest": block.state_digest,
                "applied": applied,
                "rejected": rejected.iter().map(|e| json!({
                    "id": e.tx.id(),
                    "reason": receipt_text(e),
                })).collect::<Vec<_>>(),
                "matured": block.matured,
            }));
        }
        let chain = self.chain.as_ref().expect("opened by produce");
        self.home.save_mempool(chain)?;
        Ok(Outcome::new(human.join("\n"), Value::Array(records)))
    }

    fn query(&mut self, cmd: QueryCmd) -> Result<Outcome, CliError> {
        match cmd {
            QueryCmd::Balance { address } => {
                let addr = self.resolve_address(&address)?;
                let report = self.chain()?.state().balance_query(&addr)?;
                let mut lines = vec![
                    format!("address      {}", report.address),
                    format!("height       {}", report.height),
                    format!("spendable    {}", report.spendable),
                    format!(
                        "pending-out  {} ({} transfers)",
                        report.pending_out.total,
                        report.pending_out.entries.len()
                    ),
                ];
                for p in &report.pending_out.entries {
                    lines.push(format!(
                        "  {} -> {} {} matures at {}",
                        p.tx, p.counterparty, p.amount, p.maturity_height
                    ));
                }
                lines.push(format!(
                    "pending-in   {} ({} transfers)",
                    report.pending_in.total,
                    report.pending_in.entries.len()
                ));
                for p in &report.pending_in.entries {
                    lines.push(format!(
                        "  {} <- {} {} matures at {}",
                        p.tx, p.counterparty, p.amount, p.maturity_height
                    ));
                }
                Ok(Outcome::new(
                    lines.join("\n"),
                    serde_json::to_value(&report).expect("report serializes"),
                ))
            }
            QueryCmd::Tx { id } => {
                let id: TxId = id
                    .parse()
                    .map_err(|e| CliError::usage(format!("bad transaction id {id:?}: {e}")))?;
                let chain = self.chain()?;
                if let Some((block, entry)) = chain.find_tx(&id) {
                    let index = block
                        .entries
                        .iter()
                        .position(|e| e.tx.id() == id)
                        .expect("indexed entry");
                    let transfer = chain
                        .state()
                        .pending_transfer(&id)
                        .map(|(vault, p)| (*vault, p.clone()));
                    let mut record = json!({
                        "id": id,
                        "status": "included",
                        "height": block.height,
                        "index": index,
                        "receipt": entry.receipt,
                        "tx": entry.tx,
                    });
                    let mut human = format!(
                        "{id}\n  included at height {} index {}\n  receipt {}",
                        block.height,
                        index,
                        receipt_text(entry)
                    );
                    if let Some((vault, p)) = transfer {
                        record["transfer"] = json!({
                            "vault": vault,
                            "status": p.status,
                            "maturity_height": p.maturity_height,
                        });
                        human.push_str(&format!(
                            "\n  transfer {} (matures at {})",
                            status_text(p.status),
                            p.maturity_height
                        ));
                    }
                    Ok(Outcome::new(human, record))
                } else if chain.mempool().contains(&id) {
                    Ok(Outcome::new(
                        format!("{id}\n  queued"),
                        json!({ "id": id, "status": "queued" }),
                    ))
                } else {
                    Err(CliError::rejected("unknown-transaction", id.to_string()))
                }
            }
            QueryCmd::Account { address } => {
                let addr = self.resolve_address(&address)?;
                let acct = self
                    .chain()?
                    .state()
                    .account(&addr)
                    .cloned()
                    .ok_or(vaultchain_core::RejectReason::UnknownAccount)?;
                let mut lines = vec![
                    format!("address    {}", acct.address),
                    format!("nonce      {}", acct.nonce),
                    format!("spendable  {}", acct.spendable),
                    format!(
                        "key        {}",
                        acct.pubkey.map_or("unregistered".into(), |k| k.to_string())
                    ),
                ];
                if let Some(label) = &acct.label {
                    lines.push(format!("label      {label}"));
                }
                if let Some(v) = &acct.vault {
                    let state = if v.closed {
                        "closed"
                    } else if v.frozen {
                        "frozen"
                    } else {
                        "active"
                    };
                    lines.push(format!("vault      {state}"));
                    lines.push(format!("retrieval  {}", v.retrieval));
                    lines.push(format!("cleared at {}", v.clear_height));
                    lines.push(format!("records    {}", v.pending.len()));
                }
                Ok(Outcome::new(
                    lines.join("\n"),
                    serde_json::to_value(&acct).expect("account serializes"),
                ))
            }
            QueryCmd::Head => {
                let chain = self.chain()?;
                let head = chain.head();
                Ok(Outcome::new(
                    format!(
                        "chain        {}\nheight       {}\nstate digest {}\nblock hash   {}\nmempool      {}",
                        chain.chain_id(),
                        head.height,
                        head.state_digest,
                        head.hash,
                        chain.mempool().len()
                    ),
                    json!({
                        "chain_id": chain.chain_id(),
                        "height": head.height,
                        "state_digest": head.state_digest,
                        "hash": head.hash,
                        "mempool": chain.mempool().len(),
                    }),
                ))
            }
            QueryCmd::Mempool => {
                let txs = self.chain()?.mempool().snapshot();
                let human = txs
                    .iter()
                    .map(|t| format!("{} from {} nonce {}", t.id(), t.from, t.nonce))
                    .collect::<Vec<_>>()
                    .join("\n");
                Ok(Outcome::new(
                    human,
                    Value::Array(txs.iter().map(|t| json!(t.id())).collect()),
                ))
            }
        }
    }

    fn replay(&mut self) -> Result<Outcome, CliError> {
        let genesis = self.home.load_genesis()?;
        let chain_id = genesis.chain_id.clone();
        let path = self.home.ledger_path();
        if !path.exists() {
            return Err(CliError::Integrity(format!(
                "{} is missing",
                path.display()
            )));
        }
        let state = chain::replay(genesis, &path)?;
        let digest = hex::encode(state.state_hash());
        Ok(Outcome::new(
            format!(
                "ledger ok: chain {chain_id}, height {}, state digest {digest}",
                state.height()
            ),
            json!({
                "ok": true,
                "chain_id": chain_id,
                "height": state.height(),
                "state_digest": digest,
            }),
        ))
    }

    fn workload(&mut self, args: WorkloadArgs) -> Result<Outcome, CliError> {
        if args.accounts < 2 {
            return Err(CliError::usage("--accounts must be at least 2"));
        }
        let mut wl = Workload::new(WorkloadConfig {
            accounts: args.accounts,
            seed: args.seed,
            scheme: args.scheme,
            txs_per_block: args.txs_per_block,
            ..WorkloadConfig::default()
        });
        let genesis = wl.genesis(&args.chain_id);
        let issued = genesis
            .allocations
            .iter()
            .map(|a| u128::from(a.amount.atoms()))
            .sum::<u128>();
        let mut chain = self.home.initialize(&genesis)?;
        let (mut applied, mut rejected, mut refused) = (0usize, 0usize, 0usize);
        for _ in 0..args.blocks {
            for tx in wl.next_block(chain.state()) {
                if chain.submit(tx).is_err() {
                    refused += 1;
                }
            }
            let block = chain.produce_block()?;
            applied += block.applied().count();
            rejected += block.rejected().count();
            let height = block.height;
            let total = chain.state().total_value();
            if total != issued {
                return Err(CliError::Integrity(format!(
                    "value not conserved at height {height}: {total} != {issued}"
                )));
            }
        }
        let head = chain.head().clone();
        self.home.save_mempool(&chain)?;
        self.chain = Some(chain);
        Ok(Outcome::new(
            format!(
                "workload: {} blocks, {applied} applied, {rejected} rejected in blocks, \
                 {refused} refused at submission\nstate digest {}",
                head.height, head.state_digest
            ),
            json!({
                "height": head.height,
                "applied": applied,
                "rejected": rejected,
                "refused": refused,
                "state_digest": head.state_digest,
            }),
        ))
    }
}

fn key_json(k: &KeyFile) -> Value {
    json!({
        "name": k.name,
        "scheme": k.scheme.to_string(),
        "public": k.public,
        "standard": k.standard,
        "vault": k.vault,
        "encrypted": k.is_encrypted(),
    })
}

fn receipt_text(e: &chain::BlockEntry) -> &'static str {
    match e.receipt {
        vaultchain_core::Receipt::Applied => "applied",
        vaultchain_core::Receipt::Rejected(r) => r.code(),
    }
}

pub fn status_text(s: TransferStatus) -> &'static str {
    match s {
        TransferStatus::Pending => "pending",
        TransferStatus::Matured => "matured",
        TransferStatus::Revoked => "revoked",
    }
}

fn sim(cmd: SimCmd) -> Result<Outcome, CliError> {
    let bad = |e: security::SecurityError| CliError::usage(e.to_string());
    match cmd {
        SimCmd::Attack {
            q,
            z,
            trials,
            seed,
            horizon,
        } => {
            let params = AttackParams {
                horizon,
                ..AttackParams::new(q, z, trials, seed)
            };
            let r = security::simulate_attack(&params).map_err(bad)?;
            let closed = security::catch_up_probability(q, z);
            let human = format!(
                "q                {q}\nz                {z}\ntrials           {}\nseed             {}\n\
                 estimate         {}\nstderr           {:.6e}\nclosed form      {closed:.6e}\n\
                 truncation bound {:.3e}\nclosed form valid {}",
                r.trials,
                r.seed,
                r.estimate,
                r.stderr,
                r.truncation_bound,
                params.closed_form_valid()
            );
            let mut record = serde_json::to_value(&r).expect("result serializes");
            record["q"] = json!(q);
            record["z"] = json!(z);
            record["horizon"] = json!(horizon);
            record["closed_form"] = json!(closed);
            record["closed_form_valid"] = json!(params.closed_form_valid());
            Ok(Outcome::new(human, record))
        }
        SimCmd::Cascade { p, n } => {
            let p: ExactDecimal = p
                .parse()
                .map_err(|e: security::DecimalError| CliError::usage(e.to_string()))?;
            let v = security::cascade_breach_exact(&p, n).map_err(bad)?;
            Ok(Outcome::new(
                v.to_string(),
                json!({ "p": p.to_string(), "n": n, "probability": v.to_string() }),
            ))
        }
        SimCmd::Acceptance {
            q,
            confirmations,
            trials,
            seed,
        } => {
            let r = security::acceptance_probability_estimate(q, confirmations, trials, seed)
                .map_err(bad)?;
            let human = format!(
                "q                {q}\nconfirmations    {confirmations}\ntrials           {}\n\
                 seed             {}\nestimate         {}\nstderr           {:.6e}",
                r.trials, r.seed, r.estimate, r.stderr
            );
            let mut record = serde_json::to_value(&r).expect("result serializes");
            record["q"] = json!(q);
            record["confirmations"] = json!(confirmations);
            Ok(Outcome::new(human, record))
        }
        SimCmd::Robustness {
            p_malicious,
            p_accepted,
            epsilon,
        } => {
            let ratio = security::epsilon_robustness_ratio(p_malicious, p_accepted).map_err(bad)?;
            let robust = ratio < epsilon;
            Ok(Outcome::new(
                format!("ratio   {ratio}\nepsilon {epsilon}\nrobust  {robust}"),
                json!({ "ratio": ratio, "epsilon": epsilon, "robust": robust }),
            ))
        }
    }
}
