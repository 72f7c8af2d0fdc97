"""
Witness Search Script
Re-verify the stored registry witnesses and run the bounded Prop-1 search on every class
"""

import sys
import os

# Add parent directory to path to import jlie modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from jlie.config import configure_logging, get_settings
from jlie.errors import JlieError
from jlie.gko import instantiate_class, load_registry, resolve_verdict, resolve_params, search_prop1_witness
from jlie.models import TableVerdict


def _describe(vector):
    terms = [f"{c}*X{i + 1}" for i, c in enumerate(vector) if c]
    return " + ".join(terms) or "0"


def search_witnesses(bound=None):
    """Main function: verify stored witnesses, then search for Prop-1 pairs"""

    configure_logging()
    bound = bound or get_settings().witness_bound

    print("=" * 60)
    print("🔎 SEARCHING OBSTRUCTION WITNESSES")
    print("=" * 60)

    print("\n📋 Verifying stored witnesses...")
    try:
        registry = load_registry(verify=True)
    except JlieError as exc:
        print(f"❌ Registry verification failed: {exc.detail}")
        return 1
    print(f"   ✓ {len(registry)} classes loaded, stored witnesses fire")

    print(f"\n🧮 Bounded Prop-1 search (coefficients +-p/q, p, q <= {bound})...")
    found = 0
    for class_id, entry in registry.items():
        params = dict(entry.witness_params)
        try:
            V = instantiate_class(class_id, params)
        except JlieError as exc:
            print(f"   ✗ {class_id}: {exc.detail}")
            continue
        verdict = resolve_verdict(entry, resolve_params(entry, params))
        witness = search_prop1_witness(V, bound)
        if witness is None:
            print(f"   · {class_id} ({verdict.value}): none")
            continue
        found += 1
        marker = "⚠️ " if verdict != TableVerdict.NO else "✓"
        print(f"   {marker} {class_id} ({verdict.value}): X1 = {_describe(witness[0])}, X2 = {_describe(witness[1])}")

    print("\n" + "=" * 60)
    print(f"✅ Search complete: {found} of {len(registry)} classes carry a Prop-1 pair")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    bound = int(sys.argv[1]) if len(sys.argv) > 1 else None
    sys.exit(search_witnesses(bound))
