import os
import sys
import json

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.fairness import Fairness
from tradenet.scenario import Scenario

def main():
    scenario = Scenario.from_file("fig8") # replace with your scenario
    market = scenario.market
    fairness = Fairness(market)

    # Characteristic Function
    # -----------------------
    cf = fairness.characteristic_function()
    print(cf.to_dataframe().to_string(index=False))
    print(f"Superadditive: {fairness.is_superadditive(cf)}")
    print(f"Supermodularity witness: {fairness.supermodularity_witness(cf)}")
    # -----------------------

    # Core
    # ----
    print(f"Core nonempty: {fairness.core_nonempty(cf)}")
    for vertex in fairness.core_vertices(cf):
        print(json.dumps(vertex.to_dict()))
    print(f"Essential agents: {sorted(fairness.essential_agents())}")
    # ----

    # Fair Imputations
    # ----------------
    leximin = fairness.leximin_imputation(cf)
    print("Leximin:")
    print(json.dumps(leximin.to_dict(), indent=4))
    print("Leximax:")
    print(json.dumps(fairness.leximax_imputation(cf).to_dict(), indent=4))
    print("Minvar:")
    print(json.dumps(fairness.minvar_imputation(cf).to_dict(), indent=4))

    allocation = fairness.welfare.efficient_allocations()[0]
    outcome = fairness.implement_imputation(allocation, leximin)
    print("Outcome implementing the leximin imputation:")
    print(json.dumps(outcome.to_dict(market), indent=4))
    # ----------------

if __name__ == "__main__":
    main()
