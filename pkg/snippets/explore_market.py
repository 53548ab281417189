import os
import sys
import json

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.demand import Demand
from tradenet.analysis.equilibria import Equilibria
from tradenet.analysis.welfare import Welfare
from tradenet.exact import format_vector
from tradenet.scenario import Scenario

SCENARIO = os.getenv("TRADENET_SCENARIO", "fig1")

def main():
    # Load market
    scenario = Scenario.from_file(SCENARIO)
    market = scenario.market
    demand = Demand(market)
    welfare = Welfare(market)
    equilibria = Equilibria(market)

    # Demand Sets
    # -----------
    prices = {t: 1 for t in market.trade_ids} # replace with your prices
    print(f"Demand at {prices}:")
    for agent in market.agents:
        bundles = demand.demand_set(agent, prices)
        print(f"  {agent}: {[market.sort_trades(b) for b in bundles]}")
    # -----------

    # Substitutability
    # ----------------
    for agent in market.agents:
        result = demand.is_fully_substitutable(agent)
        print(f"Agent {agent} fully substitutable: {result.substitutable}")
    # ----------------

    # Welfare and Equilibrium
    # -----------------------
    print(f"Market value: {welfare.market_value()}")
    print("Efficient allocations:", [market.sort_trades(a) for a in welfare.efficient_allocations()])
    arrangement = equilibria.solve_ce_prices(integral=True)
    print("Equilibrium:")
    print(json.dumps(arrangement.to_dict(market), indent=4))
    print(f"Lyapunov at equilibrium: {equilibria.lyapunov(arrangement.prices)}")
    print(json.dumps(format_vector(arrangement.prices), indent=4))
    # -----------------------

if __name__ == "__main__":
    main()
