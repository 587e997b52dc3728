use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;
use vaultchain_core::chain::workload::{Workload, WorkloadConfig};
use vaultchain_core::chain::Chain;
use vaultchain_core::{AccountKind, Address, KeyPair, Payload, SignatureScheme, Transaction};

fn sample_tx() -> Transaction {
    let key = KeyPair::from_seed(SignatureScheme::Ed25519, [9; 32]);
    Transaction::unsigned(
        Address::derive(key.public(), AccountKind::Vault),
        3,
        Payload::RevocablePay {
            to: Address::from_parts(AccountKind::Standard, [1; 20]),
            amount: 1_000.into(),
            delay: 6,
        },
    )
    .sign(&key)
}

fn encoding(c: &mut Criterion) {
    let tx = sample_tx();
    c.bench_function("canonical_encode", |b| {
        b.iter(|| black_box(&tx).canonical_encode())
    });
    c.bench_function("tx_id", |b| b.iter(|| black_box(&tx).id()));
    let key = KeyPair::from_seed(SignatureScheme::Ed25519, [9; 32]);
    c.bench_function("sign_ed25519", |b| {
        b.iter(|| black_box(tx.clone()).sign(&key))
    });
}

/// A chain warmed past the registration phases, with its workload.
fn warmed(txs_per_block: usize, scheme: SignatureScheme) -> (Chain, Workload) {
    let mut wl = Workload::new(WorkloadConfig {
        accounts: 50,
        seed: 1,
        scheme,
        txs_per_block,
        ..WorkloadConfig::default()
    });
    let mut chain = Chain::new(wl.genesis("bench")).unwrap();
    for _ in 0..3 {
        for tx in wl.next_block(chain.state()) {
            let _ = chain.submit(tx);
        }
        chain.produce_block().unwrap();
    }
    (chain, wl)
}

fn block_production(c: &mut Criterion) {
    let mut group = c.benchmark_group("produce_block");
    for scheme in [SignatureScheme::Null, SignatureScheme::Ed25519] {
        group.throughput(Throughput::Elements(100));
        group.bench_function(scheme.to_string(), |b| {
            let (chain, mut wl) = warmed(100, scheme);
            b.iter_batched(
                || {
                    let mut c = Chain::new(chain.genesis().clone()).unwrap();
                    for blk in &chain.blocks()[1..] {
                        for e in &blk.entries {
                            let _ = c.submit(e.tx.clone());
                        }
                        c.produce_block().unwrap();
                    }
                    for tx in wl.next_block(c.state()) {
                        let _ = c.submit(tx);
                    }
                    c
                },
                |mut c| {
                    c.produce_block().unwrap();
                    c
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn state_hash(c: &mut Criterion) {
    let (chain, _) = warmed(100, SignatureScheme::Null);
    c.bench_function("state_hash_50_accounts", |b| {
        b.iter(|| black_box(chain.state()).state_hash())
    });
}

criterion_group!(benches, encoding, block_production, state_hash);
criterion_main!(benches);
