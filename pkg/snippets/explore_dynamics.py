import os
import sys
import json

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet.analysis.dynamics import Dynamics
from tradenet.analysis.game import TradingGame
from tradenet.exact import format_number, format_vector
from tradenet.scenario import Scenario

def main():
    scenario = Scenario.from_file("fig7")
    market = scenario.market
    dynamics = Dynamics(market)
    game = TradingGame(market)

    # Offer Dynamics
    # --------------
    spec = scenario.run("table2") # replace with "random-offers" for a seeded run
    run = dynamics.run_offer_dynamics(spec.config, scenario.scheduler(spec))
    print(f"Terminated after {run.rounds} rounds: {run.terminated}")
    for record in run.trace.records:
        print(json.dumps(record.to_dict(market)))

    report = game.is_nash(run.offers, spec.config.epsilon)
    print(f"Terminal offers: {report.status}")
    arrangement = game.approx_ce_from_tight_ne(run.offers, spec.config.epsilon)
    print("Approximate equilibrium:")
    print(json.dumps(arrangement.to_dict(market), indent=4))
    # --------------

    # Clock Dynamics
    # --------------
    spec = scenario.run("random-clock")
    run = dynamics.run_price_dynamics(spec.config, scenario.scheduler(spec))
    print(f"Clock run with epsilon {format_number(run.epsilon)} over {run.rounds} rounds")
    print("Average prices:")
    print(json.dumps(format_vector(run.average_prices), indent=4))
    print(f"Gap to market value: {float(dynamics.ce_gap(run.average_prices)):.4f}")
    bound, _ = dynamics.price_dynamics_bound(run.rounds, market.max_abs_value())
    print(f"Guaranteed bound: {float(bound):.4f}")
    # --------------

if __name__ == "__main__":
    main()
