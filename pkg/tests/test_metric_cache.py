import json

from utils.metric_cache import MetricCache, cache_key

VALUES = {"loc": 1200.0, "commits": 42.0}


class TestCacheKey:

    def test_order_matters(self):
        assert cache_key("a", "b") != cache_key("b", "a")
        assert cache_key("a", "b") == cache_key("a", "b")
        assert len(cache_key("x")) == 64

    def test_window_dates_change_key(self):
        base = ("old", "new", "2020-01-01", "2020-02-01", "catalog-v1", "filter=Java", "10,15,20")
        moved = ("old", "new", "2020-01-02", "2020-02-01", "catalog-v1", "filter=Java", "10,15,20")
        assert cache_key(*base) != cache_key(*moved)


class TestMetricCache:

    def test_put_and_get(self, tmp_path):
        cache = MetricCache(tmp_path / "cache")
        key = cache_key("r1")
        path = cache.put(key, VALUES, {"release": "R01"})

        assert path == tmp_path / "cache" / "entries" / key[:2] / f"{key}.json"
        assert (tmp_path / "cache" / "metadata.json").is_file()
        assert cache.get(key) == VALUES
        assert (cache.hits, cache.misses) == (1, 0)
        assert list(cache.keys()) == [key]

    def test_miss(self, tmp_path):
        cache = MetricCache(tmp_path)
        assert cache.get(cache_key("unknown")) is None
        assert cache.misses == 1

    def test_tampered_entry_is_discarded(self, tmp_path):
        cache = MetricCache(tmp_path)
        key = cache_key("r1")
        path = cache.put(key, VALUES)
        entry = json.loads(path.read_text(encoding="utf-8"))
        entry["values"]["loc"] = 1.0
        path.write_text(json.dumps(entry), encoding="utf-8")

        assert cache.get(key) is None
        assert not path.exists()
        assert cache.misses == 1

    def test_unreadable_entry_is_discarded(self, tmp_path):
        cache = MetricCache(tmp_path)
        key = cache_key("r2")
        path = cache.put(key, VALUES)
        path.write_text("{kaputt", encoding="utf-8")
        assert cache.get(key) is None
        assert not path.exists()

    def test_entry_under_wrong_key(self, tmp_path):
        cache = MetricCache(tmp_path)
        first, second = cache_key("a"), cache_key("b")
        source = cache.put(first, VALUES)
        target = cache.entries_dir / second[:2] / f"{second}.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(source.read_text(encoding="utf-8"), encoding="utf-8")
        assert cache.get(second) is None

    def test_no_temp_files_left(self, tmp_path):
        cache = MetricCache(tmp_path)
        for i in range(5):
            cache.put(cache_key(i), {"loc": float(i)})
        assert not list(tmp_path.rglob("*.tmp"))
