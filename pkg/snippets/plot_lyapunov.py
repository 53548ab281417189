import os
import sys

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet import visuals
from tradenet.analysis.dynamics import Dynamics
from tradenet.analysis.welfare import Welfare
from tradenet.scenario import Scenario

def main():
    scenario = Scenario.from_file("fig7")
    market = scenario.market
    dynamics = Dynamics(market)

    # Plot L(p) Along a Seeded Clock Run
    # ----------------------------------
    spec = scenario.run("random-clock")
    run = dynamics.run_price_dynamics(spec.config, scenario.scheduler(spec))
    df = visuals.plot_lyapunov(run.trace, Welfare(market).market_value())
    print(df.tail())

    visuals.plot_price_path(run.trace, run.average_prices)
    # ----------------------------------

if __name__ == "__main__":
    main()
