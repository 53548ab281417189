import matplotlib.pyplot as plt
import pandas as pd

def trace_frame(trace):
    """
    Tabulate a dynamics trace.

    Parameters
    ----------
    trace : DynamicsTrace
        Offer or clock trace

    Returns
    -------
    pandas.DataFrame
        One row per round with the active agent, the potential or Lyapunov value
        (as floats) and, for clock traces, one column per trade price
    """
    rows = []
    for record in trace.records:
        row = {"round": record.round, "agent": record.agent}
        if record.potential is not None:
            row["phi"] = record.potential
        if record.lyapunov is not None:
            row["L"] = float(record.lyapunov)
        if trace.algorithm == "clock":
            for trade_id, price in record.snapshot.items():
                row[trade_id] = float(price)
        rows.append(row)
    return pd.DataFrame(rows)

def _finish(path):
    # Remove top, right, and left spines
    ax = plt.gca()
    ax.spines['top'].set_visible(False)
    ax.spines['right'].set_visible(False)
    ax.spines['left'].set_visible(False)

    # Place the legend below the x-axis with no box around it on one line
    plt.legend(loc='upper center', bbox_to_anchor=(0.5, -0.15), ncol=7, frameon=False)
    plt.grid(True)

    plt.tight_layout()
    if path is None:
        plt.show()
    else:
        plt.savefig(path)
        plt.close()

def plot_lyapunov(trace, market_value=None, path=None):
    """
    Plot the Lyapunov function L along a clock run.

    Parameters
    ----------
    trace : DynamicsTrace
        Clock trace recorded with ``track=True``
    market_value : Fraction, optional
        Draws the floor w(I) that L reaches exactly at equilibrium prices
    path : str, optional
        Save to this file instead of showing the figure
    """
    df = trace_frame(trace)

    plt.figure(figsize=(14, 6))
    ms = 4  # marker size
    lw = 2  # linewidth

    plt.plot(df["round"], df["L"], label='L(p)', marker='o', markersize=ms, linestyle='-', linewidth=lw, color="steelblue")
    if market_value is not None:
        plt.axhline(y=float(market_value), color='firebrick', linestyle='--', linewidth=lw, label='Market Value w(I)')

    plt.title('Lyapunov Function Along the Clock Dynamics')
    plt.xlabel('Round')
    _finish(path)
    return df

def plot_potential(trace, path=None):
    """
    Plot the potential phi along an offer run.

    Parameters
    ----------
    trace : DynamicsTrace
        Offer trace recorded with ``track=True``
    path : str, optional
        Save to this file instead of showing the figure
    """
    df = trace_frame(trace)

    plt.figure(figsize=(14, 6))
    ms = 4  # marker size
    lw = 2  # linewidth

    plt.step(df["round"], df["phi"], where='post', label='phi', linewidth=lw, color="seagreen")
    plt.plot(df["round"], df["phi"], linestyle='', marker='s', markersize=ms, color="seagreen")

    plt.title('Potential Along the Offer Dynamics')
    plt.xlabel('Round')
    _finish(path)
    return df

def plot_price_path(trace, average_prices=None, path=None):
    """
    Plot every trade price along a clock run.

    Parameters
    ----------
    trace : DynamicsTrace
        Clock trace
    average_prices : dict, optional
        Averaged prices to mark as horizontal lines
    path : str, optional
        Save to this file instead of showing the figure
    """
    df = trace_frame(trace)
    trades = [c for c in df.columns if c not in ("round", "agent", "L")]
    colors = ["steelblue", "seagreen", "firebrick", "goldenrod", "dodgerblue", "darkgrey"]
    markers = ["o", "d", "s", "^", "v"]

    plt.figure(figsize=(14, 6))
    ms = 4  # marker size
    lw = 2  # linewidth

    for i, trade_id in enumerate(trades):
        color = colors[i % len(colors)]
        plt.plot(df["round"], df[trade_id], label=trade_id, marker=markers[i % len(markers)], markersize=ms, linestyle='-', linewidth=lw, color=color)
        if average_prices is not None:
            plt.axhline(y=float(average_prices[trade_id]), color=color, linestyle='--', linewidth=1, label=f'{trade_id} (average)')

    plt.title('Prices Along the Clock Dynamics')
    plt.xlabel('Round')
    _finish(path)
    return df
