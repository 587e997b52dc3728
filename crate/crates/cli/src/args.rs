use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vaultchain_core::SignatureScheme;

/// Operate a local vaultchain home: keys, transactions, blocks, queries,
/// ledger replay, scripted scenarios, and attack simulations.
///
/// Wherever an address is expected, `@name` means the standard address of
/// key `name` and `@name.vault` its vault address.
#[derive(Debug, Parser)]
#[command(name = "vaultchain", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Chain home directory.
    #[arg(
        long,
        global = true,
        env = "VAULTCHAIN_HOME",
        default_value = ".vaultchain"
    )]
    pub home: PathBuf,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Store new private keys unencrypted.
    #[arg(long, global = true)]
    pub insecure: bool,
    /// Passphrase for encrypting and unlocking keys.
    #[arg(
        long,
        global = true,
        env = "VAULTCHAIN_PASSPHRASE",
        hide_env_values = true
    )]
    pub passphrase: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the chain home and write the genesis block.
    Init(InitArgs),
    /// Create and list keys in the home's key store.
    #[command(subcommand)]
    Keys(KeysCmd),
    /// Sign a transaction and queue it in the mempool.
    #[command(subcommand)]
    Tx(TxCmd),
    /// Produce blocks from the mempool.
    #[command(subcommand)]
    Block(BlockCmd),
    /// Read balances, transactions, accounts, and the chain tip.
    #[command(subcommand)]
    Query(QueryCmd),
    /// Attack and cascade probability calculators.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Re-execute the ledger from genesis and check every stored digest.
    Replay,
    /// Run a script of commands, one per line, against this home.
    RunScenario(ScenarioArgs),
    /// Fill a fresh home with a seeded random workload.
    Workload(WorkloadArgs),
}

#[derive(Debug, Args)]
pub struct InitArgs {
    /// Genesis config in TOML.
    #[arg(long, conflicts_with_all = ["chain_id", "alloc", "theta_max", "scheme"])]
    pub genesis: Option<PathBuf>,
    #[arg(long, required_unless_present = "genesis")]
    pub chain_id: Option<String>,
    /// Initial balance, as ADDRESS=AMOUNT. Repeatable.
    #[arg(long, value_name = "ADDRESS=AMOUNT")]
    pub alloc: Vec<String>,
    /// Longest allowed revocation delay, in blocks.
    #[arg(long)]
    pub theta_max: Option<u64>,
    #[arg(long)]
    pub scheme: Option<SignatureScheme>,
}

#[derive(Debug, Subcommand)]
pub enum KeysCmd {
    /// Create a key pair and show its standard and vault addresses.
    Gen {
        #[arg(long)]
        name: String,
        /// Derive the key from this text instead of fresh randomness.
        #[arg(long)]
        seed: Option<String>,
        /// Defaults to the home's signature scheme, or ed25519 before `init`.
        #[arg(long)]
        scheme: Option<SignatureScheme>,
    },
    List,
}

#[derive(Debug, Clone, Args)]
pub struct TxOpts {
    /// Override the next nonce.
    #[arg(long)]
    pub nonce: Option<u64>,
    /// Submit even if a dry run against the pending state rejects it.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum TxCmd {
    /// Irrevocable payment from a standard account.
    Pay {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        amount: u64,
        #[command(flatten)]
        opts: TxOpts,
    },
    /// Create a vault funded from a standard account.
    VaultCreate {
        #[arg(long)]
        from: String,
        #[arg(long)]
        retrieval: String,
        #[arg(long)]
        amount: u64,
        /// Key that will control the vault; defaults to the funding key.
        #[arg(long)]
        vault_key: Option<String>,
        #[command(flatten)]
        opts: TxOpts,
    },
    /// Payment from a vault that matures after `delay` blocks.
    RevocablePay {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        amount: u64,
        #[arg(long)]
        delay: u64,
        #[command(flatten)]
        opts: TxOpts,
    },
    /// Pull back a pending revocable payment to the retrieval account.
    Revoke {
        #[arg(long)]
        from: String,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        opts: TxOpts,
    },
    /// Drop settled pending records; with --close, also sweep and close.
    VaultClear {
        #[arg(long)]
        from: String,
        #[arg(long)]
        close: bool,
        #[command(flatten)]
        opts: TxOpts,
    },
    /// Register the signing key of an account, or update its label.
    AccountSet {
        #[arg(long)]
        from: String,
        #[arg(long)]
        label: Option<String>,
        /// Must equal the bound retrieval account, if given for a vault.
        #[arg(long)]
        retrieval: Option<String>,
        #[command(flatten)]
        opts: TxOpts,
    },
}

#[derive(Debug, Subcommand)]
pub enum BlockCmd {
    /// Seal the mempool into the next block.
    Produce {
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum QueryCmd {
    /// Spendable balance with pending revocable value shown apart.
    Balance {
        address: String,
    },
    /// Where a transaction landed and how it fared.
    Tx {
        id: String,
    },
    Account {
        address: String,
    },
    /// Height, state digest, and block hash of the tip.
    Head,
    Mempool,
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Monte Carlo catch-up estimate next to the closed form.
    Attack {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        z: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = vaultchain_core::security::DEFAULT_HORIZON)]
        horizon: u64,
    },
    /// Exact breach probability of an n-level vault cascade.
    Cascade {
        /// Per-level breach probability, as a decimal.
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u32,
    },
    /// Estimated chance a transaction survives `confirmations` blocks.
    Acceptance {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        confirmations: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Malicious-to-accepted ratio against a robustness threshold.
    Robustness {
        #[arg(long)]
        p_malicious: f64,
        #[arg(long)]
        p_accepted: f64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    pub script: PathBuf,
    /// Seeds keys generated without an explicit --seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WorkloadArgs {
    #[arg(long)]
    pub blocks: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub accounts: usize,
    #[arg(long, default_value_t = 10)]
    pub txs_per_block: usize,
    #[arg(long, default_value = "ed25519")]
    pub scheme: SignatureScheme,
    #[arg(long, default_value = "workload")]
    pub chain_id: String,
}

/// A single scenario line: any command except the ones that manage homes
/// or scripts.
#[derive(Debug, Parser)]
#[command(no_binary_name = true, name = "scenario")]
pub struct ScriptLine {
    #[command(subcommand)]
    pub command: Command,
}
