//! The bundled MiniSol corpus: transcriptions of the two classic examples
//! (a reentrant withdraw and an unrestricted selfdestruct) plus generated
//! contract families whose vulnerable call depth is known by construction.
//!
//! Random choices (which functions read which state variables in the sparse
//! family) come from a ChaCha stream seeded by `DEPTHSCAN_SEED`, defaulting
//! to [`DEFAULT_SEED`].

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 2019;

pub const CALLER: &str = "\
contract Caller {
    mapping (address => uint) public balance;

    function withdraw(uint amount) public {
        if (balance[msg.sender] >= amount) {
            require(msg.sender.call.value(amount)());
            balance[msg.sender] -= amount;
        }
    }

    function withdrawFixed(uint amount) public {
        if (balance[msg.sender] >= amount) {
            balance[msg.sender] -= amount;
            require(msg.sender.call.value(amount)());
        }
    }
}
";

pub const SUICIDE: &str = "\
contract Suicide {
    address public owner;

    modifier onlyOwner {
        if (msg.sender != owner) revert();
        _;
    }

    function setOwner() public {
        owner = msg.sender;
    }

    function kill(address addr) public onlyOwner {
        selfdestruct(msg.sender);
    }
}
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// The two hand-written classics and their fixed versions.
    Classic,
    /// Functions that never read state another function writes.
    Independent,
    /// `step1 -> step2 -> ... -> finish`: a depth-n selfdestruct.
    Chain,
    /// Ten functions with exactly one read-after-write edge.
    Pair,
    /// Many functions, few read-after-write edges, seeded at random.
    Sparse,
    /// Token, bank and counter style contracts.
    Ledger,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    /// File stem, e.g. `chain_3`.
    pub name: String,
    pub family: Family,
    /// Whether the contract is expected to be free of findings at depths 1-3.
    pub safe: bool,
    pub source: String,
}

fn entry(name: &str, family: Family, safe: bool, source: impl Into<String>) -> CorpusEntry {
    CorpusEntry {
        name: name.to_string(),
        family,
        safe,
        source: source.into(),
    }
}

/// Reads `DEPTHSCAN_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("DEPTHSCAN_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// The corpus for the seed in `DEPTHSCAN_SEED`.
pub fn bundled() -> Vec<CorpusEntry> {
    generate(seed_from_env())
}

pub fn generate(seed: u64) -> Vec<CorpusEntry> {
    let mut out = vec![
        entry("caller", Family::Classic, false, CALLER),
        entry("caller_fixed", Family::Classic, true, caller_fixed()),
        entry("suicide", Family::Classic, false, SUICIDE),
        entry("suicide_fixed", Family::Classic, true, suicide_fixed()),
    ];
    for k in [3, 5, 8] {
        out.push(entry(
            &format!("indep_{k}"),
            Family::Independent,
            true,
            independent(k, false),
        ));
    }
    out.push(entry(
        "indep_kill_4",
        Family::Independent,
        false,
        independent(4, true),
    ));
    for (n, noise) in [(2, 1), (3, 2), (4, 1)] {
        out.push(entry(
            &format!("chain_{n}"),
            Family::Chain,
            // a depth-4 chain cannot complete within three transactions
            n > 3,
            chain(n, noise, false),
        ));
    }
    out.push(entry(
        "chain_3_safe",
        Family::Chain,
        true,
        chain(3, 2, true),
    ));
    out.push(entry("pair_10", Family::Pair, false, pair(10)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (i, (k, edges)) in [(8, 1), (8, 2), (10, 2), (10, 3), (12, 2), (12, 3)]
        .into_iter()
        .enumerate()
    {
        let (source, vulnerable) = sparse(&mut rng, i, k, edges);
        out.push(entry(
            &format!("sparse_{i}_k{k}_e{edges}"),
            Family::Sparse,
            !vulnerable,
            source,
        ));
    }

    out.push(entry("counter", Family::Ledger, false, COUNTER));
    out.push(entry("counter_safe", Family::Ledger, true, COUNTER_SAFE));
    out.push(entry("safe_sub", Family::Ledger, true, SAFE_SUB));
    out.push(entry("token", Family::Ledger, false, TOKEN));
    out.push(entry("bank", Family::Ledger, false, BANK));
    out.push(entry("bank_safe", Family::Ledger, true, BANK_SAFE));
    out.push(entry("vault", Family::Ledger, false, VAULT));
    out.push(entry("loop_sum", Family::Ledger, true, LOOP_SUM));
    out.push(entry("guarded_kill", Family::Ledger, true, GUARDED_KILL));
    out
}

fn caller_fixed() -> String {
    "\
contract CallerFixed {
    mapping (address => uint) public balance;

    function withdrawFixed(uint amount) public {
        if (balance[msg.sender] >= amount) {
            balance[msg.sender] -= amount;
            require(msg.sender.call.value(amount)());
        }
    }
}
"
    .to_string()
}

fn suicide_fixed() -> String {
    "\
contract SuicideFixed {
    address public owner;

    modifier onlyCreator {
        require(msg.sender == 1);
        _;
    }

    modifier onlyOwner {
        if (msg.sender != owner) revert();
        _;
    }

    function setOwner(address next) public onlyCreator {
        owner = next;
    }

    function kill() public onlyOwner {
        selfdestruct(msg.sender);
    }
}
"
    .to_string()
}

fn independent(k: usize, with_kill: bool) -> String {
    let mut s = String::new();
    let name = if with_kill { "IndepKill" } else { "Indep" };
    writeln!(s, "contract {name}{k} {{").unwrap();
    for i in 0..k {
        writeln!(s, "    uint s{i};").unwrap();
    }
    for i in 0..k {
        writeln!(
            s,
            "\n    function set{i}(uint v) public {{\n        if (v > {limit}) {{\n            s{i} = v;\n        }} else {{\n            s{i} = {i};\n        }}\n    }}",
            limit = 10 * (i + 1)
        )
        .unwrap();
    }
    if with_kill {
        writeln!(
            s,
            "\n    function close() public {{\n        selfdestruct(msg.sender);\n    }}"
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

/// `step1` arms the chain, each `step{i}` requires its predecessor, and
/// `finish` selfdestructs once the last stage is set: a depth-`n` issue.
fn chain(n: usize, noise: usize, safe: bool) -> String {
    assert!(n >= 2);
    let mut s = String::new();
    let suffix = if safe { "Safe" } else { "" };
    writeln!(s, "contract Chain{n}{suffix} {{").unwrap();
    for i in 1..n {
        writeln!(s, "    uint stage{i};").unwrap();
    }
    for j in 0..noise {
        writeln!(s, "    uint noise{j};").unwrap();
    }
    writeln!(
        s,
        "\n    function step1(uint key) public {{\n        require(key == 7);\n        stage1 = 1;\n    }}"
    )
    .unwrap();
    for i in 2..n {
        writeln!(
            s,
            "\n    function step{i}() public {{\n        require(stage{prev} == 1);\n        stage{i} = 1;\n    }}",
            prev = i - 1
        )
        .unwrap();
    }
    let guard = if safe {
        "        require(msg.sender == 1);\n"
    } else {
        ""
    };
    writeln!(
        s,
        "\n    function finish() public {{\n        require(stage{last} == 1);\n{guard}        selfdestruct(msg.sender);\n    }}",
        last = n - 1
    )
    .unwrap();
    for j in 0..noise {
        writeln!(
            s,
            "\n    function touch{j}(uint v) public {{\n        noise{j} = v;\n    }}"
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

/// `k` public functions: `prime` writes the one variable `consume` reads,
/// and `k - 2` writers touch variables nobody reads.
fn pair(k: usize) -> String {
    assert!(k >= 2);
    let mut s = String::new();
    writeln!(s, "contract Pair{k} {{\n    uint primed;").unwrap();
    for j in 1..=k - 2 {
        writeln!(s, "    uint w{j};").unwrap();
    }
    s.push_str(
        "\n    function prime(uint v) public {\n        primed = v;\n    }\n\n    function consume() public {\n        if (primed == 7) {\n            selfdestruct(msg.sender);\n        }\n    }\n",
    );
    for j in 1..=k - 2 {
        writeln!(
            s,
            "\n    function write{j}(uint v) public {{\n        w{j} = v;\n    }}"
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

/// `k` functions each owning a slot `s{i}`; `edges` random reader/writer
/// pairs add a guarded read of another function's slot. The first reader of
/// every other contract hides a selfdestruct behind its read.
fn sparse(rng: &mut ChaCha8Rng, index: usize, k: usize, edges: usize) -> (String, bool) {
    let mut pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|w| (0..k).filter(move |&r| r != w).map(move |r| (w, r)))
        .collect();
    pairs.shuffle(rng);
    let mut chosen: Vec<(usize, usize)> = pairs.into_iter().take(edges).collect();
    chosen.sort_unstable();
    let vulnerable = index.is_multiple_of(2);
    let trigger: u64 = rng.gen_range(20..120);

    let mut s = String::new();
    writeln!(s, "contract Sparse{index}K{k} {{").unwrap();
    for i in 0..k {
        writeln!(s, "    uint s{i};").unwrap();
    }
    for i in 0..k {
        writeln!(s, "    uint r{i};").unwrap();
    }
    let mut planted = false;
    for i in 0..k {
        // Argument validation; keeps the planted trigger reachable.
        let bound: u64 = rng.gen_range(120..250);
        writeln!(
            s,
            "\n    function f{i}(uint v) public {{\n        require(v < {bound});"
        )
        .unwrap();
        for &(w, _) in chosen.iter().filter(|(_, r)| *r == i) {
            if vulnerable && !planted {
                planted = true;
                writeln!(
                    s,
                    "        if (s{w} == {trigger}) {{\n            selfdestruct(msg.sender);\n        }}"
                )
                .unwrap();
            } else {
                writeln!(
                    s,
                    "        if (s{w} > v) {{\n            r{i} = v;\n        }}"
                )
                .unwrap();
            }
        }
        writeln!(s, "        s{i} = v;\n    }}").unwrap();
    }
    s.push_str("}\n");
    (s, vulnerable && planted)
}

const COUNTER: &str = "\
contract Counter {
    uint total;

    function add(uint amt) public {
        total = total + amt;
    }
}
";

const COUNTER_SAFE: &str = "\
contract CounterSafe {
    uint total;

    function add(uint amt) public {
        require(amt < 100);
        require(total < 100);
        total = total + amt;
    }
}
";

const SAFE_SUB: &str = "\
contract SafeSub {
    uint diff;

    function sub(uint a, uint b) public {
        require(a >= b);
        diff = a - b;
    }
}
";

const TOKEN: &str = "\
contract Token {
    mapping (address => uint) balances;

    function mint(uint amt) public {
        require(amt < 100);
        balances[msg.sender] += amt;
    }

    function transfer(address to, uint amt) public {
        balances[msg.sender] -= amt;
        balances[to] += amt;
    }
}
";

const BANK: &str = "\
contract Bank {
    mapping (address => uint) balance;

    function deposit() public {
        balance[msg.sender] += msg.value;
    }

    function withdraw(uint amount) public {
        require(balance[msg.sender] >= amount);
        require(msg.sender.call.value(amount)());
        balance[msg.sender] -= amount;
    }
}
";

const BANK_SAFE: &str = "\
contract BankSafe {
    mapping (address => uint) balance;

    function deposit() public {
        require(msg.value < 100);
        require(balance[msg.sender] < 100);
        balance[msg.sender] += msg.value;
    }

    function withdraw(uint amount) public {
        require(balance[msg.sender] >= amount);
        balance[msg.sender] -= amount;
        require(msg.sender.call.value(amount)());
    }
}
";

const VAULT: &str = "\
contract Vault {
    uint unlocked;
    mapping (address => uint) credit;

    function unlock() public {
        unlocked = 1;
    }

    function claim(uint amt) public {
        require(unlocked == 1);
        require(credit[msg.sender] >= amt);
        require(msg.sender.call.value(amt)());
        credit[msg.sender] -= amt;
    }
}
";

const LOOP_SUM: &str = "\
contract LoopSum {
    uint total;

    function run(uint n) public {
        require(n < 3);
        uint i = 0;
        while (i < n) {
            i = i + 1;
        }
        total = i;
    }
}
";

const GUARDED_KILL: &str = "\
contract GuardedKill {
    uint counter;

    function bump(uint v) public {
        counter = v;
    }

    function kill() public {
        require(msg.sender == 1);
        selfdestruct(msg.sender);
    }
}
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{lower_contract, parse_source};

    #[test]
    fn every_entry_parses_and_lowers() {
        let corpus = generate(DEFAULT_SEED);
        assert!(corpus.len() >= 22, "{}", corpus.len());
        for e in &corpus {
            let unit = parse_source(&e.source).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            lower_contract(&unit).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a: Vec<String> = generate(7).into_iter().map(|e| e.source).collect();
        let b: Vec<String> = generate(7).into_iter().map(|e| e.source).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn names_are_unique() {
        let corpus = generate(DEFAULT_SEED);
        let mut names: Vec<&str> = corpus.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), corpus.len());
    }
}
