//! Benchmark programs and seeded input generators.
//!
//! The fixed programs are small analogues of the classic bounds-check
//! workloads: an HTML-escaping routine whose output cursor advances by a
//! branch-dependent stride, a URL-defanging routine with a fixed output
//! buffer, a windowed block comparison with parameter offsets, a
//! fixed-offset stencil, and a function whose loop keeps a region of its
//! own after a content-driven store poisons the function level.
//!
//! `generate_suite` produces randomized programs from seven templates,
//! each shipped with warm-up inputs that are safe for *any* input content
//! with the same parameter values (so the knowledge base only ever learns
//! worst-case-safe points) and evaluation inputs that are mostly dominated
//! by the warm-ups, sometimes merely safe, and occasionally violating.

use checklang_core::trace::{InputBindings, InputValue};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub struct TestProgram {
    pub name: String,
    pub source: String,
    pub warmup: Vec<InputBindings>,
    pub eval: Vec<InputBindings>,
}

fn int(v: i64) -> InputValue {
    InputValue::Int(v)
}

fn arr(v: Vec<i64>) -> InputValue {
    InputValue::Array(v)
}

// ---------------------------------------------------------------------------
// Fixed analogue programs

pub const ESCAPE: &str = r#"// HTML-escaping routine: '<' and '>' expand to four output characters.
func escape(array<int> src, array<int> dst, int ssize, int dsize, int snum) {
    if (ssize + 3 * snum + 1 > dsize) {
        dsize = ssize + 3 * snum + 1;
        resize(dst, dsize);
    }
    int cp2 = 0;
    for (int cp1 = 0; cp1 < ssize && cp2 < ssize + 3 * snum; cp1 = cp1 + 1) {
        switch (src[cp1]) {
            case '<':
                dst[cp2] = '&'; cp2 = cp2 + 1;
                dst[cp2] = 'l'; cp2 = cp2 + 1;
                dst[cp2] = 't'; cp2 = cp2 + 1;
                dst[cp2] = ';';
            case '>':
                dst[cp2] = '&'; cp2 = cp2 + 1;
                dst[cp2] = 'g'; cp2 = cp2 + 1;
                dst[cp2] = 't'; cp2 = cp2 + 1;
                dst[cp2] = ';';
            default:
                dst[cp2] = src[cp1];
        }
        cp2 = cp2 + 1;
    }
    dst[cp2] = '\0';
}

func main() {
    input int ssize;
    input int dsize;
    input int snum;
    input array<int> src;
    array<int> dst = alloc(dsize);
    call escape(src, dst, ssize, dsize, snum);
    printa(dst);
}
"#;

/// Truthful escape input: `snum` is the exact special count and `dsize`
/// at least the worst-case output size, unless `undersize` asks for a
/// violating run.
pub fn escape_input(rng: &mut StdRng, undersize: bool) -> InputBindings {
    let ssize = rng.random_range(0..=60i64);
    let mut src = Vec::new();
    let mut snum = 0;
    for _ in 0..ssize {
        match rng.random_range(0..5) {
            0 => {
                src.push('<' as i64);
                snum += 1;
            }
            1 => {
                src.push('>' as i64);
                snum += 1;
            }
            d => src.push('a' as i64 + d),
        }
    }
    let pad = rng.random_range(0..8usize);
    src.extend(std::iter::repeat_n(0, pad));
    let need = 3 * snum + ssize + 1;
    let dsize = if undersize && need > 2 {
        rng.random_range(1..need.min(8))
    } else {
        need + rng.random_range(0..16)
    };
    let mut inputs = InputBindings::new();
    inputs.insert("ssize".into(), int(ssize));
    inputs.insert("dsize".into(), int(dsize));
    inputs.insert("snum".into(), int(snum));
    inputs.insert("src".into(), arr(src));
    inputs
}

pub const URLESCAPE: &str = r#"// URL defanging into a fixed 1000-slot buffer; special characters
// expand fourfold. Safe exactly when 3*s + n + 1 <= 1000.
func defang_url(array<int> str, int n, int s) {
    array<int> out = alloc(1000);
    int j = 0;
    for (int i = 0; i < n && j < 3 * s + n; i = i + 1) {
        switch (str[i]) {
            case '<':
                out[j] = '&'; j = j + 1;
                out[j] = 'l'; j = j + 1;
                out[j] = 't'; j = j + 1;
                out[j] = ';';
            case '>':
                out[j] = '&'; j = j + 1;
                out[j] = 'g'; j = j + 1;
                out[j] = 't'; j = j + 1;
                out[j] = ';';
            default:
                out[j] = str[i];
        }
        j = j + 1;
    }
    out[j] = '\0';
    print(j);
}

func main() {
    input int n;
    input int s;
    input array<int> str;
    call defang_url(str, n, s);
}
"#;

/// Every request array is padded to this fixed length, which also
/// matches the defanged output buffer in [`URLESCAPE`].
pub const URL_ARRAY_LEN: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UrlStyle {
    /// Long plain paths: large n, at most a few specials.
    PlainLong,
    /// Short query-heavy urls: small n, many specials.
    ShortBusy,
    /// The wedge between the dominance staircase and the convex boundary:
    /// moderate specials at substantial lengths.
    Wedge,
}

/// One request with exactly `s` specials among `n` characters, padded to
/// the fixed array length.
pub fn url_request(n: i64, s: i64, rng: &mut StdRng) -> InputBindings {
    let n = n.clamp(0, URL_ARRAY_LEN as i64);
    let s = s.clamp(0, n);
    let mut chars: Vec<i64> = Vec::with_capacity(URL_ARRAY_LEN);
    for i in 0..n {
        if i < s {
            chars.push(if rng.random_bool(0.5) { '<' } else { '>' } as i64);
        } else {
            chars.push(rng.random_range('a' as i64..='z' as i64));
        }
    }
    // Scatter the specials.
    for i in (1..n as usize).rev() {
        let j = rng.random_range(0..=i);
        chars.swap(i, j);
    }
    chars.resize(URL_ARRAY_LEN, 0);
    let mut inputs = InputBindings::new();
    inputs.insert("n".into(), int(n));
    inputs.insert("s".into(), int(s));
    inputs.insert("str".into(), arr(chars));
    inputs
}

pub fn url_request_styled(style: UrlStyle, rng: &mut StdRng) -> InputBindings {
    let (n, s) = match style {
        UrlStyle::PlainLong => {
            let n = rng.random_range(600..=990);
            (n, rng.random_range(0..=3))
        }
        UrlStyle::ShortBusy => {
            let n = rng.random_range(20..=200);
            (n, rng.random_range(0..=n.min(32)))
        }
        UrlStyle::Wedge => {
            let n = rng.random_range(250..=850);
            let s_max = (908 - n) / 53;
            (n, rng.random_range(2..=s_max.max(2)))
        }
    };
    url_request(n, s, rng)
}

/// The two boundary observations the region construction is seeded with.
pub fn url_seed_requests(rng: &mut StdRng) -> Vec<InputBindings> {
    vec![url_request(855, 1, rng), url_request(60, 16, rng)]
}

pub const BLOCK_CMP: &str = r#"// Windowed comparison of two offsets into a shared block. The window
// is 21 elements; accesses are safe whenever nblock > i + 20.
func block_cmp(int i1, int i2, array<int> block, int nblock) {
    int k = 0;
    int result = 0;
    while (k <= 20) {
        int a = block[i1 + k];
        int b = block[i2 + k];
        if (a != b) {
            return result;
        }
        k = k + 1;
        result = result + 1;
    }
    return result;
}

func main() {
    input int nblock;
    input int i1;
    input int i2;
    input int trials;
    input int seed;
    array<int> block = alloc(nblock);
    for (int k = 0; k < nblock; k = k + 1) {
        block[k] = k / 400 + seed;
    }
    int acc = 0;
    for (int t = 0; t < trials; t = t + 1) {
        int r = 0;
        r = call block_cmp(i1, i2, block, nblock);
        acc = acc + r;
    }
    print(acc);
}
"#;

/// Worst-case-safe inputs satisfy `nblock > i + 20` for both offsets.
pub fn block_cmp_input(rng: &mut StdRng, i_max: i64, nblock_min: i64) -> InputBindings {
    let i1 = rng.random_range(0..=i_max);
    let i2 = rng.random_range(0..=i_max);
    let nblock = rng.random_range(nblock_min..=nblock_min + 400);
    let mut inputs = InputBindings::new();
    inputs.insert("nblock".into(), int(nblock));
    inputs.insert("i1".into(), int(i1));
    inputs.insert("i2".into(), int(i2));
    inputs.insert("trials".into(), int(rng.random_range(1..=4)));
    inputs.insert("seed".into(), int(rng.random_range(0..1000)));
    inputs
}

pub const STENCIL: &str = r#"// Fixed-offset relaxation steps over a constant-size grid: every access
// dereferences the same cells, so one checked execution covers them all.
func smooth(array<int> grid, array<int> buf, int n) {
    for (int t = 0; t < n; t = t + 1) {
        buf[4] = grid[3] + grid[5];
        grid[4] = buf[4] / 2;
        buf[9] = grid[8] + grid[10];
        grid[9] = buf[9] / 2;
    }
}

func main() {
    input int n;
    array<int> grid = alloc(16);
    array<int> buf = alloc(16);
    grid[3] = 30;
    grid[5] = 50;
    grid[8] = 80;
    grid[10] = 100;
    call smooth(grid, buf, n);
    printa(grid);
}
"#;

pub fn stencil_input(rng: &mut StdRng) -> InputBindings {
    let mut inputs = InputBindings::new();
    inputs.insert("n".into(), int(rng.random_range(1..=50)));
    inputs
}

pub const MIXED: &str = r#"// A content-driven store keeps the function level on full checks, but
// the loop's accesses only depend on entry values, so the loop keeps a
// region of its own.
func mix(array<int> data, array<int> lut, int n, int off) {
    int j = lut[0];
    data[j] = j;
    for (int k = 0; k < n; k = k + 1) {
        data[off] = data[off] + k;
        data[off + 1] = data[off] - k;
    }
}

func main() {
    input int n;
    input int off;
    input int j0;
    array<int> data = alloc(64);
    array<int> lut = alloc(4);
    lut[0] = j0;
    call mix(data, lut, n, off);
    printa(data);
}
"#;

pub fn mixed_input(rng: &mut StdRng, off_max: i64) -> InputBindings {
    let mut inputs = InputBindings::new();
    inputs.insert("n".into(), int(rng.random_range(0..=40)));
    inputs.insert("off".into(), int(rng.random_range(0..=off_max)));
    inputs.insert("j0".into(), int(rng.random_range(0..=63)));
    inputs
}

// ---------------------------------------------------------------------------
// Randomized program suite

/// Deterministically generate `count` programs with warm-up and evaluation
/// inputs. Roughly one eval input in twenty violates its bounds on
/// purpose; the rest are safe, mostly within the warmed-up envelope.
pub fn generate_suite(seed: u64, count: usize, warmups: usize, evals: usize) -> Vec<TestProgram> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = Counts {
        warmups: warmups.max(1),
        evals: evals.max(1),
    };
    (0..count)
        .map(|i| match i % 8 {
            0 => gen_copy(i, &mut rng, n),
            1 => gen_stride(i, &mut rng, n),
            2 => gen_cursor(i, &mut rng, n),
            3 => gen_guarded(i, &mut rng, n),
            4 => gen_window(i, &mut rng, n),
            5 => gen_fixed(i, &mut rng, n),
            6 => gen_looplocal(i, &mut rng, n),
            _ => gen_twophase(i, &mut rng, n),
        })
        .collect()
}

#[derive(Clone, Copy)]
struct Counts {
    warmups: usize,
    evals: usize,
}

/// b[i + OFF] = a[i] * K + c over i < n.
fn gen_copy(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let off = rng.random_range(0..8i64);
    let k = rng.random_range(1..5i64);
    let source = format!(
        r#"func work(array<int> a, array<int> b, int n, int c) {{
    for (int i = 0; i < n; i = i + 1) {{
        b[i + {off}] = a[i] * {k} + c;
    }}
}}

func main() {{
    input int n;
    input int c;
    input array<int> a;
    input array<int> b0;
    array<int> b = alloc(n + {off});
    call work(a, b, n, c);
    printa(b);
    printa(b0);
}}
"#
    );
    let env_n = rng.random_range(30..60i64);
    let make = |rng: &mut StdRng, n: i64, la: i64, c: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("n".into(), int(n));
        inputs.insert("c".into(), int(c));
        inputs.insert(
            "a".into(),
            arr((0..la).map(|_| rng.random_range(-50..50)).collect()),
        );
        inputs.insert("b0".into(), arr(vec![rng.random_range(0..9)]));
        inputs
    };
    let mut warmup = Vec::new();
    let slack = rng.random_range(0..6);
    warmup.push(make(rng, env_n, env_n + slack, 7));
    for _ in 0..counts.warmups.saturating_sub(1) {
        let n = rng.random_range(0..=env_n);
        let slack = rng.random_range(0..6);
        let c = rng.random_range(-9..9);
        warmup.push(make(rng, n, n + slack, c));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            // Violating: the source array is shorter than n.
            let n = rng.random_range(2..=env_n);
            eval.push(make(rng, n, n - 1, 0));
        } else if roll < 3 {
            // Safe but outside the envelope.
            let n = env_n + rng.random_range(1..20);
            eval.push(make(rng, n, n + 2, 1));
        } else {
            let n = rng.random_range(0..=env_n);
            let c = rng.random_range(-9..9);
            eval.push(make(rng, n, env_n + 8, c));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_copy"),
        source,
        warmup,
        eval,
    }
}

/// Nested loops with stride indexing: b[r * STRIDE + c], linear bounds.
fn gen_stride(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let stride = rng.random_range(8..14i64);
    let source = format!(
        r#"func fill(array<int> b, int rows, int cols, int bias) {{
    for (int r = 0; r < rows; r = r + 1) {{
        for (int c = 0; c < cols; c = c + 1) {{
            b[r * {stride} + c] = r + c * 2 + bias;
        }}
    }}
}}

func main() {{
    input int rows;
    input int cols;
    input int bias;
    input int cap;
    array<int> b = alloc(cap);
    call fill(b, rows, cols, bias);
    printa(b);
}}
"#
    );
    let env_rows = rng.random_range(4..9i64);
    let make = |rng: &mut StdRng, rows: i64, cols: i64, cap: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("rows".into(), int(rows));
        inputs.insert("cols".into(), int(cols));
        inputs.insert("bias".into(), int(rng.random_range(-5..5)));
        inputs.insert("cap".into(), int(cap));
        inputs
    };
    // Worst case: (rows-1) * stride + cols - 1 < cap.
    let cap_for = |rows: i64, cols: i64| (rows - 1).max(0) * stride + cols;
    let mut warmup = Vec::new();
    warmup.push(make(rng, env_rows, stride, cap_for(env_rows, stride) + 4));
    for _ in 0..counts.warmups.saturating_sub(1) {
        let rows = rng.random_range(1..=env_rows);
        let cols = rng.random_range(1..=stride);
        let cap = cap_for(env_rows, stride) + 4;
        warmup.push(make(rng, rows, cols, cap));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            let rows = rng.random_range(2..=env_rows);
            eval.push(make(rng, rows, stride, cap_for(rows, stride) - 2));
        } else {
            let rows = rng.random_range(0..=env_rows);
            let cols = rng.random_range(0..=stride);
            eval.push(make(rng, rows, cols, cap_for(env_rows, stride) + 4));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_stride"),
        source,
        warmup,
        eval,
    }
}

/// Nested loops with a persistent cursor: the multiplicative case. Hull
/// stores refuse these scopes; union dominance still applies.
fn gen_cursor(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let source = r#"func pack(array<int> b, int rows, int cols) {
    int w = 0;
    for (int r = 0; r < rows; r = r + 1) {
        for (int c = 0; c < cols; c = c + 1) {
            b[w] = r * 100 + c;
            w = w + 1;
        }
    }
}

func main() {
    input int rows;
    input int cols;
    input int cap;
    array<int> b = alloc(cap);
    call pack(b, rows, cols);
    printa(b);
}
"#
    .to_string();
    let env_rows = rng.random_range(3..7i64);
    let env_cols = rng.random_range(3..7i64);
    let make = |rng: &mut StdRng, rows: i64, cols: i64, cap: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("rows".into(), int(rows));
        inputs.insert("cols".into(), int(cols));
        inputs.insert("cap".into(), int(cap));
        let _ = rng;
        inputs
    };
    let env_cap = env_rows * env_cols + 2;
    let mut warmup = Vec::new();
    warmup.push(make(rng, env_rows, env_cols, env_cap));
    for _ in 0..counts.warmups.saturating_sub(1) {
        let rows = rng.random_range(0..=env_rows);
        let cols = rng.random_range(0..=env_cols);
        warmup.push(make(rng, rows, cols, env_cap));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            let rows = rng.random_range(2..=env_rows + 2);
            let cols = rng.random_range(2..=env_cols + 2);
            eval.push(make(rng, rows, cols, rows * cols - 1));
        } else {
            let rows = rng.random_range(0..=env_rows);
            let cols = rng.random_range(0..=env_cols);
            eval.push(make(rng, rows, cols, env_cap));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_cursor"),
        source,
        warmup,
        eval,
    }
}

/// Escape-style grow-on-demand with a resize guard.
fn gen_guarded(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let pad = rng.random_range(1..5i64);
    let source = format!(
        r#"func append(array<int> buf, int len, int extra) {{
    if (len + extra + {pad} > 8) {{
        resize(buf, len + extra + {pad});
    }}
    for (int i = 0; i < extra; i = i + 1) {{
        buf[len + i] = i * 2;
    }}
}}

func main() {{
    input int len;
    input int extra;
    array<int> buf = alloc(8);
    call append(buf, len, extra);
    printa(buf);
}}
"#
    );
    let make = |len: i64, extra: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("len".into(), int(len));
        inputs.insert("extra".into(), int(extra));
        inputs
    };
    let env_len = rng.random_range(8..20i64);
    let env_extra = rng.random_range(8..20i64);
    let mut warmup = vec![make(env_len, env_extra)];
    for _ in 0..counts.warmups.saturating_sub(1) {
        let len = rng.random_range(0..=env_len);
        let extra = rng.random_range(0..=env_extra);
        warmup.push(make(len, extra));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let len = rng.random_range(0..=env_len);
        let extra = rng.random_range(0..=env_extra);
        eval.push(make(len, extra));
    }
    TestProgram {
        name: format!("p{idx:02}_guarded"),
        source,
        warmup,
        eval,
    }
}

/// Windowed scan with a content-driven early exit (warm-ups must be
/// worst-case safe).
fn gen_window(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let window = rng.random_range(6..16i64);
    let source = format!(
        r#"func scan(int start, array<int> data, int len) {{
    int k = 0;
    int hits = 0;
    while (k < {window}) {{
        if (data[start + k] == 0) {{
            return hits;
        }}
        hits = hits + 1;
        k = k + 1;
    }}
    return hits;
}}

func main() {{
    input int start;
    input int len;
    input int seed;
    array<int> data = alloc(len);
    for (int k = 0; k < len; k = k + 1) {{
        data[k] = (k + seed) * 13 - (k + seed) / 3;
    }}
    int h = 0;
    h = call scan(start, data, len);
    print(h);
}}
"#
    );
    let make = |start: i64, len: i64, seed: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("start".into(), int(start));
        inputs.insert("len".into(), int(len));
        inputs.insert("seed".into(), int(seed));
        inputs
    };
    let env_start = rng.random_range(10..40i64);
    let env_len = env_start + window + rng.random_range(4..30);
    let mut warmup = vec![make(env_start, env_len, 1)];
    for _ in 0..counts.warmups.saturating_sub(1) {
        let start = rng.random_range(0..=env_start);
        let pad = rng.random_range(0..8);
        let seed = rng.random_range(0..50);
        warmup.push(make(start, env_len + pad, seed));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            // Start too close to the end: out of bounds inside the window.
            let len = rng.random_range(2..window);
            eval.push(make(len - 1, len, 7));
        } else {
            let start = rng.random_range(0..=env_start);
            let seed = rng.random_range(0..50);
            eval.push(make(start, env_len, seed));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_window"),
        source,
        warmup,
        eval,
    }
}

/// Constant-offset updates: one verified run covers everything.
fn gen_fixed(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let cells: Vec<i64> = (0..4).map(|_| rng.random_range(0..12i64)).collect();
    let source = format!(
        r#"func pulse(array<int> cells, int rounds) {{
    for (int t = 0; t < rounds; t = t + 1) {{
        cells[{a}] = cells[{b}] + 1;
        cells[{c}] = cells[{d}] + cells[{a}];
    }}
}}

func main() {{
    input int rounds;
    array<int> cells = alloc(12);
    call pulse(cells, rounds);
    printa(cells);
}}
"#,
        a = cells[0],
        b = cells[1],
        c = cells[2],
        d = cells[3]
    );
    let make = |rounds: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("rounds".into(), int(rounds));
        inputs
    };
    let mut warmup = vec![make(3)];
    for _ in 0..counts.warmups.saturating_sub(1) {
        warmup.push(make(rng.random_range(1..10)));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        eval.push(make(rng.random_range(0..60)));
    }
    TestProgram {
        name: format!("p{idx:02}_fixed"),
        source,
        warmup,
        eval,
    }
}

/// A content-driven store keeps the function level checked; the loop
/// keeps a region over its entry-available offset.
fn gen_looplocal(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let cap = rng.random_range(40..90i64);
    let source = format!(
        r#"func churn(array<int> data, array<int> lut, int n, int off) {{
    int j = lut[0];
    data[j] = j;
    for (int k = 0; k < n; k = k + 1) {{
        data[off] = data[off] + k;
        data[off + 1] = data[off] - k;
    }}
}}

func main() {{
    input int n;
    input int off;
    input int j0;
    array<int> data = alloc({cap});
    array<int> lut = alloc(4);
    lut[0] = j0;
    call churn(data, lut, n, off);
    printa(data);
}}
"#
    );
    let make = |n: i64, off: i64, j0: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("n".into(), int(n));
        inputs.insert("off".into(), int(off));
        inputs.insert("j0".into(), int(j0));
        inputs
    };
    let env_off = cap - 2;
    let mut warmup = vec![make(30, env_off, 0)];
    for _ in 0..counts.warmups.saturating_sub(1) {
        let off = rng.random_range(0..=env_off);
        let j0 = rng.random_range(0..cap);
        warmup.push(make(rng.random_range(0..=30), off, j0));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            // The content-driven store goes out of bounds.
            eval.push(make(5, 3, cap + rng.random_range(0..5)));
        } else if roll == 1 {
            // The loop itself would overrun: off + 1 == cap.
            eval.push(make(5, cap - 1, 0));
        } else {
            let off = rng.random_range(0..=env_off);
            let j0 = rng.random_range(0..cap);
            eval.push(make(rng.random_range(0..=30), off, j0));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_looplocal"),
        source,
        warmup,
        eval,
    }
}

/// Two worker functions sharing one driver; the second reads at parameter
/// offsets like the window template, the first writes a prefix.
fn gen_twophase(idx: usize, rng: &mut StdRng, counts: Counts) -> TestProgram {
    let off = rng.random_range(0..6i64);
    let source = format!(
        r#"func produce(array<int> ring, int count, int base) {{
    for (int i = 0; i < count; i = i + 1) {{
        ring[i + {off}] = base + i;
    }}
}}

func consume(array<int> ring, int count, int take) {{
    int acc = 0;
    for (int i = 0; i < take; i = i + 1) {{
        acc = acc + ring[i + {off}];
    }}
    print(acc);
}}

func main() {{
    input int count;
    input int take;
    input int base;
    input int cap;
    array<int> ring = alloc(cap);
    call produce(ring, count, base);
    call consume(ring, count, take);
    printa(ring);
}}
"#
    );
    let make = |count: i64, take: i64, base: i64, cap: i64| {
        let mut inputs = InputBindings::new();
        inputs.insert("count".into(), int(count));
        inputs.insert("take".into(), int(take));
        inputs.insert("base".into(), int(base));
        inputs.insert("cap".into(), int(cap));
        inputs
    };
    let env_count = rng.random_range(20..50i64);
    let env_cap = env_count + off + rng.random_range(2..8);
    let mut warmup = vec![make(env_count, env_count, 5, env_cap)];
    for _ in 0..counts.warmups.saturating_sub(1) {
        let count = rng.random_range(0..=env_count);
        let take = rng.random_range(0..=count);
        let base = rng.random_range(0..10);
        warmup.push(make(count, take, base, env_cap));
    }
    let mut eval = Vec::new();
    for _ in 0..counts.evals {
        let roll = rng.random_range(0..20);
        if roll == 0 {
            let count = rng.random_range(1..=env_count);
            eval.push(make(count, count, 0, count + off - 1));
        } else {
            let count = rng.random_range(0..=env_count);
            let take = rng.random_range(0..=count);
            let base = rng.random_range(0..10);
            eval.push(make(count, take, base, env_cap));
        }
    }
    TestProgram {
        name: format!("p{idx:02}_twophase"),
        source,
        warmup,
        eval,
    }
}
