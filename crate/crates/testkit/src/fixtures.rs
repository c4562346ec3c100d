//! Hand-written smelly MiniLang functions.
//!
//! Every fixture holds literals and calls to functions outside itself, so a
//! mutated literal or a dropped call is always a real semantic change.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    /// Whole file text. May contain neighbours of the target function.
    pub source: String,
    pub function: String,
    /// Smell kind name, e.g. `ComplexMethod`.
    pub kind: &'static str,
}

fn fixture(name: &str, kind: &'static str, function: &str, source: &str) -> Fixture {
    Fixture { name: name.into(), source: source.trim_start().into(), function: function.into(), kind }
}

/// Functions the extract-method oracle should resolve at High confidence.
/// Every smell kind appears at least four times.
pub fn curated() -> Vec<Fixture> {
    vec![
        fixture("cc_discount", "ComplexConditional", "discount", r#"
function discount(order, user) {
    let rate = 0;
    if (order.total > 100 && user.member || order.coupon === 'VIP') {
        rate = 15;
    }
    applyRate(order, rate);
    return rate;
}
"#),
        fixture("cc_while_retry", "ComplexConditional", "retry", r#"
function retry(job, limit) {
    let tries = 0;
    while (tries < limit && !job.done && job.error !== 'fatal') {
        runJob(job);
        tries = tries + 1;
    }
    return tries;
}
"#),
        fixture("cc_guard", "ComplexConditional", "canShip", r#"
function canShip(parcel, route) {
    if (!parcel.sealed || parcel.weight > 30 || route.closed) {
        report(parcel, 'hold');
        return false;
    }
    dispatch(parcel, route);
    return true;
}
"#),
        fixture("cc_with_neighbour", "ComplexConditional", "accessLevel", r#"
function describe(user) {
    return format(user.name, 'user');
}

function accessLevel(user, resource) {
    let level = 'none';
    if (user.admin || resource.owner === user.id && resource.shared) {
        level = 'write';
    }
    audit(describe(user), level);
    return level;
}
"#),
        fixture("cc_nested_condition", "ComplexConditional", "shouldAlert", r#"
function shouldAlert(sensor, config) {
    let reading = sensor.value;
    if (reading > config.max || reading < config.min && config.strict) {
        notify(sensor.id, 'range');
        return 1;
    }
    return 0;
}
"#),
        fixture("cm_router", "ComplexMethod", "route", r#"
function route(req, res) {
    let path = req.path;
    if (path === '/') {
        send(res, 'home');
    }
    if (path === '/login') {
        send(res, 'login');
    }
    if (path === '/logout') {
        send(res, 'bye');
    }
    if (req.method === 'POST') {
        parseBody(req);
    }
    if (req.user) {
        touch(req.user, 1);
    }
    if (req.secure) {
        markSecure(res);
    }
    if (req.gzip) {
        compress(res, 6);
    }
    if (req.cache) {
        setHeader(res, 'cache-control', 'max-age=60');
    }
    if (req.cors) {
        setHeader(res, 'access-control-allow-origin', '*');
    }
    return res;
}
"#),
        fixture("cm_switch", "ComplexMethod", "tokenKind", r#"
function tokenKind(ch) {
    let kind = 'other';
    switch (ch) {
        case '(':
            kind = 'lparen';
        case ')':
            kind = 'rparen';
        case '{':
            kind = 'lbrace';
        case '}':
            kind = 'rbrace';
        case ';':
            kind = 'semi';
        default:
            kind = classify(ch);
    }
    if (kind === 'other') {
        warn('unknown', ch);
    }
    if (isSpace(ch)) {
        kind = 'space';
    }
    if (isDigit(ch)) {
        kind = 'digit';
    }
    while (pending(kind) > 0) {
        drain(kind);
    }
    return kind;
}
"#),
        fixture("cm_loops", "ComplexMethod", "summarize", r#"
function summarize(rows) {
    let total = 0;
    let bad = 0;
    for (let i = 0; i < rows.length; i = i + 1) {
        total = total + value(rows, i);
    }
    if (total > 1000) {
        log('large', total);
    }
    if (total < 0) {
        log('negative', total);
    }
    while (hasMore(rows)) {
        fetchMore(rows, 50);
    }
    if (rows.flagged) {
        bad = bad + 1;
    }
    if (rows.partial) {
        bad = bad + 2;
    }
    if (bad > 2) {
        alarm('rows', bad);
    }
    let mean = total > 0 ? total / 2 : 0;
    if (mean > 10) {
        log('mean', mean);
    }
    return mean;
}
"#),
        fixture("cm_validation", "ComplexMethod", "validateForm", r#"
function validateForm(form) {
    let errors = 0;
    if (empty(form.name)) {
        errors = errors + 1;
        flag(form, 'name');
    }
    if (empty(form.email)) {
        errors = errors + 1;
        flag(form, 'email');
    }
    if (!matches(form.email, '@')) {
        errors = errors + 1;
        flag(form, 'email-format');
    }
    if (form.age < 18) {
        errors = errors + 1;
        flag(form, 'age');
    }
    if (form.password.length < 8) {
        errors = errors + 1;
        flag(form, 'password');
    }
    if (form.password !== form.confirm) {
        errors = errors + 1;
        flag(form, 'confirm');
    }
    if (!form.terms) {
        errors = errors + 1;
        flag(form, 'terms');
    }
    if (form.country === 'XX') {
        errors = errors + 1;
        flag(form, 'country');
    }
    if (errors > 0) {
        render(form, 'errors');
    }
    return errors;
}
"#),
        fixture("cm_state_machine", "ComplexMethod", "step", r#"
function step(machine, input) {
    let state = machine.state;
    if (state === 'idle') {
        if (input === 'start') {
            state = 'running';
        }
    } else if (state === 'running') {
        if (input === 'pause') {
            state = 'paused';
        }
    } else if (state === 'paused') {
        if (input === 'resume') {
            state = 'running';
        }
    }
    if (input === 'reset') {
        state = 'idle';
    }
    if (input === 'stop') {
        state = 'stopped';
    }
    if (machine.locked) {
        state = machine.state;
    }
    save(machine, state);
    return state;
}
"#),
        fixture("br_import", "BumpyRoad", "importRows", r#"
function importRows(file, db) {
    let rows = readAll(file);
    if (rows.length > 0) {
        for (let i = 0; i < rows.length; i = i + 1) {
            insert(db, rows, i);
        }
    }
    log('inserted', rows.length);
    if (db.dirty) {
        while (db.pending > 0) {
            flush(db, 100);
        }
    }
    return rows.length;
}
"#),
        fixture("br_three_bumps", "BumpyRoad", "publish", r#"
function publish(post, site) {
    if (post.draft) {
        if (post.author) {
            notify(post.author, 'draft');
        }
    }
    render(post, site);
    if (site.cdn) {
        for (let i = 0; i < 3; i = i + 1) {
            purge(site.cdn, i);
        }
    }
    if (site.feed) {
        if (post.public) {
            appendFeed(site.feed, post);
        }
    }
    return true;
}
"#),
        fixture("br_switch", "BumpyRoad", "handle", r#"
function handle(event, ui) {
    switch (event.type) {
        case 'click':
            if (ui.enabled) {
                press(ui, event.x);
            }
        default:
            ignore(event);
    }
    redraw(ui, 0);
    while (ui.queue > 0) {
        if (ui.busy) {
            wait(ui, 16);
        }
        ui.queue = ui.queue - 1;
    }
    return ui.queue;
}
"#),
        fixture("br_cleanup", "BumpyRoad", "cleanup", r#"
function cleanup(dir, opts) {
    let removed = 0;
    if (opts.temp) {
        for (let i = 0; i < dir.size; i = i + 1) {
            removeTemp(dir, i);
        }
    }
    if (opts.logs) {
        if (dir.logs > 10) {
            rotate(dir, 'logs');
        }
    }
    return removed;
}
"#),
        fixture("br_sync", "BumpyRoad", "sync", r#"
function sync(local, remote) {
    let changed = 0;
    if (local.stale) {
        while (local.version < remote.version) {
            pull(local, remote);
        }
    }
    changed = diffCount(local, remote);
    if (changed > 0) {
        if (remote.writable) {
            push(local, remote);
        }
    }
    return changed;
}
"#),
        fixture("dnl_config", "DeepNestedLogic", "loadConfig", r#"
function loadConfig(path, env) {
    let config = defaults('app');
    if (exists(path)) {
        let text = read(path);
        if (text.length > 0) {
            let parsed = parse(text);
            if (parsed.valid) {
                if (env === 'prod') {
                    config = merge(config, parsed);
                }
            }
        }
    }
    return config;
}
"#),
        fixture("dnl_loops", "DeepNestedLogic", "scanGrid", r#"
function scanGrid(grid, target) {
    let hits = 0;
    for (let y = 0; y < grid.height; y = y + 1) {
        for (let x = 0; x < grid.width; x = x + 1) {
            if (cell(grid, x, y) === target) {
                if (visible(grid, x, y)) {
                    mark(grid, x, y);
                }
            }
        }
    }
    log('scan', hits);
    return hits;
}
"#),
        fixture("dnl_while_switch", "DeepNestedLogic", "pump", r#"
function pump(queue, sink) {
    while (queue.open) {
        let msg = take(queue);
        switch (msg.kind) {
            case 'data':
                if (sink.ready) {
                    while (sink.backlog > 100) {
                        pause(sink, 5);
                    }
                }
            default:
                drop(msg, 'unknown');
        }
    }
    return sink.count;
}
"#),
        fixture("dnl_else", "DeepNestedLogic", "price", r#"
function price(item, cart) {
    let total = item.base;
    if (item.onSale) {
        total = total - 5;
    } else {
        trace('full-price', item.id);
        if (cart.size > 3) {
            if (cart.member) {
                if (item.category === 'books') {
                    total = total * 0.9;
                }
            }
        }
    }
    return round(total, 2);
}
"#),
        fixture("dnl_guard", "DeepNestedLogic", "deliver", r#"
function deliver(msg, channel) {
    if (channel.connected) {
        if (msg.size < 4096) {
            if (channel.quota > 0) {
                if (!msg.expired) {
                    transmit(channel, msg);
                    channel.quota = channel.quota - 1;
                }
            }
        }
    }
    trace('deliver', msg.id);
}
"#),
        large("lm_report", "buildReport", 36),
        large("lm_setup", "setupScene", 40),
        large("lm_migrate", "migrate", 48),
        large("lm_render", "renderPage", 62),
    ]
}

/// A long straight-line function: `steps` pairs of statements with no
/// branching, so LargeMethod is its only smell.
fn large(name: &str, function: &str, steps: usize) -> Fixture {
    let mut s = format!("function {function}(ctx, opts) {{\n    let acc = 0;\n");
    for i in 0..steps {
        let _ = writeln!(s, "    acc = acc + stage{}(ctx, {});", i % 7, i * 3 + 1);
        let _ = writeln!(s, "    emit(ctx, 'step-{i}', acc);");
    }
    s.push_str("    return acc;\n}\n");
    Fixture { name: name.into(), source: s, function: function.into(), kind: "LargeMethod" }
}

/// Curated fixtures plus parameterized variants, at least `min` in total,
/// for feeding the corrupting providers.
pub fn corruption_corpus(min: usize) -> Vec<Fixture> {
    let mut out = curated();
    let mut i = 0;
    while out.len() < min {
        out.push(variant(i));
        i += 1;
    }
    out
}

fn variant(i: usize) -> Fixture {
    let n = i + 1;
    let name = format!("variant{n}");
    match i % 4 {
        0 => Fixture {
            source: format!(
                "function {name}(a, b, c) {{\n    let r = {n};\n    if (a > {n} && b < {} || check(c, '{name}')) {{\n        r = update(r, {});\n    }}\n    return r;\n}}\n",
                n * 2,
                n + 7
            ),
            name: format!("variant_cc_{n}"),
            function: name,
            kind: "ComplexConditional",
        },
        1 => Fixture {
            source: format!(
                "function {name}(list, opts) {{\n    if (list.size > {n}) {{\n        while (more(list)) {{\n            take(list, {n});\n        }}\n    }}\n    emit('{name}', list.size);\n    if (opts.verbose) {{\n        if (opts.level > {}) {{\n            dump(list, 'full');\n        }}\n    }}\n    return list.size;\n}}\n",
                n % 5
            ),
            name: format!("variant_br_{n}"),
            function: name,
            kind: "BumpyRoad",
        },
        2 => Fixture {
            source: format!(
                "function {name}(node, depth) {{\n    let seen = {n};\n    if (node.left) {{\n        if (node.right) {{\n            if (depth > {}) {{\n                if (visit(node, '{name}')) {{\n                    seen = seen + 1;\n                }}\n            }}\n        }}\n    }}\n    return seen;\n}}\n",
                n % 9
            ),
            name: format!("variant_dnl_{n}"),
            function: name,
            kind: "DeepNestedLogic",
        },
        _ => {
            let mut s = format!("function {name}(x) {{\n    let out = {n};\n");
            for k in 0..10 {
                let _ = writeln!(s, "    if (x === {}) {{\n        out = pick(x, '{name}-{k}');\n    }}", n * 10 + k);
            }
            s.push_str("    return out;\n}\n");
            Fixture { source: s, name: format!("variant_cm_{n}"), function: name, kind: "ComplexMethod" }
        }
    }
}

/// An original function and a hand-made refactoring of it that resolves
/// the target smell but introduces exactly one less severe smell.
#[derive(Debug, Clone)]
pub struct MidFixture {
    pub name: &'static str,
    pub source: &'static str,
    pub function: &'static str,
    pub kind: &'static str,
    pub refactored: &'static str,
    pub introduced: &'static str,
}

pub fn mid() -> Vec<MidFixture> {
    vec![
        MidFixture {
            name: "dnl_flattened_into_condition",
            kind: "DeepNestedLogic",
            function: "deliver",
            introduced: "ComplexConditional",
            source: r#"function deliver(msg, channel) {
    if (channel.connected) {
        if (msg.size < 4096) {
            if (channel.quota > 0) {
                if (!msg.expired) {
                    transmit(channel, msg);
                }
            }
        }
    }
    trace('deliver', msg.id);
}
"#,
            refactored: r#"function deliver(msg, channel) {
    if (channel.connected && msg.size < 4096 && channel.quota > 0 && !msg.expired) {
        transmit(channel, msg);
    }
    trace('deliver', msg.id);
}
"#,
        },
        MidFixture {
            name: "bumpy_road_half_extracted",
            kind: "BumpyRoad",
            function: "sync",
            introduced: "ComplexConditional",
            source: r#"function sync(local, remote) {
    if (local.stale) {
        if (remote.online || remote.cached) {
            pull(local, remote);
        }
    }
    let changed = diffCount(local, remote);
    if (changed > 0) {
        while (remote.busy) {
            wait(remote, 10);
        }
    }
    return changed;
}
"#,
            refactored: r#"function sync(local, remote) {
    if (local.stale && (remote.online || remote.cached)) {
        pull(local, remote);
    }
    let changed = diffCount(local, remote);
    sync_part1(changed, remote);
    return changed;
}

function sync_part1(changed, remote) {
    if (changed > 0) {
        while (remote.busy) {
            wait(remote, 10);
        }
    }
}
"#,
        },
        MidFixture {
            name: "complex_method_split_with_merged_guard",
            kind: "ComplexMethod",
            function: "tally",
            introduced: "ComplexConditional",
            source: r#"function tally(v) {
    let n = 0;
    if (v.a) {
        if (v.b) {
            if (v.c) {
                n = n + 1;
            }
        }
    }
    if (v.d) {
        n = n + 2;
    }
    if (v.e) {
        n = n + 3;
    }
    if (v.f) {
        n = n + 4;
    }
    if (v.g) {
        n = n + 5;
    }
    if (v.h) {
        n = n + 6;
    }
    if (v.i) {
        n = n + 7;
    }
    record(n, 'tally');
    return n;
}
"#,
            refactored: r#"function tally(v) {
    let n = 0;
    if (v.a && v.b && v.c) {
        n = n + 1;
    }
    n = tally_part1(v, n);
    record(n, 'tally');
    return n;
}

function tally_part1(v, n) {
    if (v.d) {
        n = n + 2;
    }
    if (v.e) {
        n = n + 3;
    }
    if (v.f) {
        n = n + 4;
    }
    if (v.g) {
        n = n + 5;
    }
    if (v.h) {
        n = n + 6;
    }
    if (v.i) {
        n = n + 7;
    }
    return n;
}
"#,
        },
    ]
}
