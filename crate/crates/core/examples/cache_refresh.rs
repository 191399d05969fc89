//! Cache hits, expiry and the background refresh of primed keys, driven by
//! a manual clock.

use newsthemes::cache::{CacheConfig, CacheKey, OverviewCache};
use newsthemes::clock::{Clock, ManualClock};
use newsthemes::themes::Overview;

fn main() {
    let config = CacheConfig::default();
    let cache: OverviewCache<String> = OverviewCache::new(config);
    let clock = ManualClock::new(1_000_000);
    let key = CacheKey::new("(brexit)", 86_400);
    let compose = |now| Ok(Overview::empty("(brexit)", 86_400, now));

    let (_, hit) = cache.get_or_compose(&key, clock.now(), || compose(clock.now())).unwrap();
    println!("first request hit: {hit}");
    clock.advance(60);
    let (_, hit) = cache.get_or_compose(&key, clock.now(), || compose(clock.now())).unwrap();
    println!("a minute later hit: {hit}");

    let mut refreshes = 0;
    for _ in 0..60 {
        clock.advance(config.refresh_interval_seconds);
        refreshes += cache.refresh_tick(clock.now(), |_| compose(clock.now()));
    }
    println!("refreshes over 30 hours: {refreshes}; still primed: {}", cache.priming_for(&key).is_some());
    let stats = cache.stats();
    println!("hits {} misses {} ratio {:.3}", stats.hits, stats.misses, stats.hit_ratio);
}
